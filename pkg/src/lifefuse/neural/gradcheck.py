"""Central finite-difference verification of hand-written backward passes."""

import numpy as np

from ..errors import InvalidArgumentError, NumericalFailure


def relative_error(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.abs(a - b) / np.maximum(1e-8, np.abs(a) + np.abs(b))


def _projection_loss(shape, seed):
    proj = np.random.default_rng(seed).standard_normal(shape)

    def loss(y):
        return float(np.sum(y * proj)), proj

    return loss


def grad_check(model, x, eps=1e-6, loss_fn=None, check_input=True, seed=0, report=None):
    """Maximum relative error between analytic and finite-difference gradients.

    ``model`` is any layer-protocol object (``forward``/``backward``/
    ``zero_grad``/``named_parameters``). ``loss_fn(y) -> (loss, dloss/dy)``
    defaults to a fixed random projection of the output, which exercises
    arbitrary upstream gradients. Every parameter element and, with
    ``check_input``, every input element is probed in eval mode.

    If ``report`` is a dict it receives the worst error per parameter name.
    """
    if not 1e-7 <= eps <= 1e-3:
        raise InvalidArgumentError(f"eps must lie in [1e-7, 1e-3], got {eps}")
    x = np.array(x, dtype=np.float64)
    if loss_fn is None:
        y0 = model.forward(x, train=False)
        loss_fn = _projection_loss(np.shape(y0), seed)

    def evaluate(inp):
        return loss_fn(model.forward(inp, train=False))[0]

    model.zero_grad()
    y = model.forward(x, train=False)
    _, dy = loss_fn(y)
    dx = model.backward(dy)

    worst = 0.0
    targets = [(name, p, g.copy()) for name, p, g in model.named_parameters()]
    if check_input:
        targets.append(("input", x, np.asarray(dx, dtype=np.float64)))
    for name, arr, analytic in targets:
        numeric = np.empty(arr.shape, dtype=np.float64)
        flat = arr.reshape(-1)
        num_flat = numeric.reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + eps
            up = evaluate(x)
            flat[idx] = orig - eps
            down = evaluate(x)
            flat[idx] = orig
            if not (np.isfinite(up) and np.isfinite(down)):
                raise NumericalFailure(f"non-finite loss while probing {name}[{idx}]", where=name)
            num_flat[idx] = (up - down) / (2.0 * eps)
        err = float(np.max(relative_error(analytic, numeric))) if numeric.size else 0.0
        if report is not None:
            report[name] = err
        worst = max(worst, err)
    return worst
