"""Dempster-Shafer baseline over the frame {life, none}."""

from dataclasses import dataclass
from functools import reduce

import numpy as np

from ..errors import ConflictError, InvalidArgumentError


@dataclass(frozen=True)
class MassFunction:
    """Belief masses on {life}, {none} and the whole frame (unknown)."""

    life: float
    none: float
    theta: float

    def __post_init__(self):
        vals = (self.life, self.none, self.theta)
        if any(v < -1e-12 for v in vals):
            raise InvalidArgumentError(f"masses must be non-negative, got {vals}")
        if abs(sum(vals) - 1.0) > 1e-9:
            raise InvalidArgumentError(f"masses must sum to 1, got {sum(vals)}")

    def as_tuple(self):
        return (self.life, self.none, self.theta)


VACUOUS = MassFunction(0.0, 0.0, 1.0)


def probability_to_mass(p, reliability=0.9):
    """Discount a detector probability by the sensor's reliability."""
    if not (0.0 <= p <= 1.0 and 0.0 <= reliability <= 1.0):
        raise InvalidArgumentError(f"p and reliability must lie in [0, 1], got {p}, {reliability}")
    return MassFunction(p * reliability, (1.0 - p) * reliability, 1.0 - reliability)


def conflict(m1, m2):
    return m1.life * m2.none + m1.none * m2.life


def combine_pair(m1, m2):
    k = conflict(m1, m2)
    if k >= 1.0 - 1e-15:
        raise ConflictError("totally conflicting evidence (K = 1); combination undefined")
    norm = 1.0 - k
    life = m1.life * m2.life + m1.life * m2.theta + m1.theta * m2.life
    none = m1.none * m2.none + m1.none * m2.theta + m1.theta * m2.none
    theta = m1.theta * m2.theta
    return MassFunction(life / norm, none / norm, theta / norm)


def ds_combine(masses):
    """Dempster's rule applied pairwise from left to right."""
    masses = list(masses)
    if len(masses) < 2:
        raise InvalidArgumentError("ds_combine needs at least two mass functions")
    return reduce(combine_pair, masses)


def ds_fuse_probabilities(probs, reliabilities=(0.9, 0.9, 0.9)):
    """Vectorised baseline over (n_sensors, T) probabilities.

    Returns ``(m_life, m_none)`` arrays; the baseline decision is
    ``m_life > m_none`` and ``m_life`` serves as its ranking score.
    """
    probs = np.asarray(probs, dtype=np.float64)
    r = np.asarray(reliabilities, dtype=np.float64)[:, None]
    life, none, theta = probs * r, (1.0 - probs) * r, np.broadcast_to(1.0 - r, probs.shape)
    cl, cn, ct = life[0], none[0], theta[0]
    for i in range(1, probs.shape[0]):
        k = cl * none[i] + cn * life[i]
        if np.any(k >= 1.0 - 1e-15):
            raise ConflictError("totally conflicting evidence (K = 1); combination undefined")
        norm = 1.0 - k
        cl, cn, ct = ((cl * life[i] + cl * theta[i] + ct * life[i]) / norm,
                      (cn * none[i] + cn * theta[i] + ct * none[i]) / norm,
                      ct * theta[i] / norm)
    return cl, cn
