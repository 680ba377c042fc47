"""Adam with bias correction."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidArgumentError


@dataclass
class AdamState:
    step: int = 0
    first_moment: np.ndarray = None
    second_moment: np.ndarray = None
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    learning_rate: float = 1e-3

    def __post_init__(self):
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise InvalidArgumentError("Adam betas must lie in (0, 1)")
        if self.eps <= 0:
            raise InvalidArgumentError("Adam eps must be positive")
        if self.step < 0:
            raise InvalidArgumentError("Adam step must be >= 0")


def adam_step(params, grads, state):
    """Return ``(new_params, new_state)``; inputs are left untouched."""
    params = np.asarray(params)
    grads = np.asarray(grads)
    if params.shape != grads.shape:
        raise InvalidArgumentError(f"param/grad shape mismatch {params.shape} vs {grads.shape}")
    m = np.zeros_like(params) if state.first_moment is None else state.first_moment
    v = np.zeros_like(params) if state.second_moment is None else state.second_moment
    if m.shape != params.shape or v.shape != params.shape:
        raise InvalidArgumentError("Adam moments must be shaped like the parameters")
    step = state.step + 1
    m = state.beta1 * m + (1.0 - state.beta1) * grads
    v = state.beta2 * v + (1.0 - state.beta2) * grads * grads
    m_hat = m / (1.0 - state.beta1**step)
    v_hat = v / (1.0 - state.beta2**step)
    new = params - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
    new_state = AdamState(step, m, v, state.beta1, state.beta2, state.eps, state.learning_rate)
    return new.astype(params.dtype, copy=False), new_state


@dataclass
class Adam:
    """Applies :func:`adam_step` in place to ``(name, param, grad)`` triples."""

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    states: dict = field(default_factory=dict)

    def step(self, named_parameters):
        for name, param, grad in named_parameters:
            state = self.states.get(name)
            if state is None:
                state = AdamState(beta1=self.beta1, beta2=self.beta2, eps=self.eps,
                                  learning_rate=self.learning_rate)
            new, self.states[name] = adam_step(param, grad, state)
            param[...] = new
