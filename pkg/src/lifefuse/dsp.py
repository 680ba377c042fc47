"""Classical preprocessing: PCA clutter suppression, EMD sifting,
cross-correlation, centred smoothing and G-width fusion windows."""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DegenerateSignalError, InvalidArgumentError

logger = logging.getLogger(__name__)

RECOMMENDED_G = (64, 128)


# ---------------------------------------------------------------------------
# PCA clutter suppression
# ---------------------------------------------------------------------------


def center_rows(data):
    """Subtract each slow-time row's mean over fast time."""
    data = np.asarray(data, dtype=np.float64)
    return data - data.mean(axis=1, keepdims=True)


def pca_components(data):
    """SVD ``(U, S, Vt)`` of the row-centred echo data, components by decreasing variance."""
    return np.linalg.svd(center_rows(data), full_matrices=False)


def pca_clutter_suppress(echo, drop_leading=1, keep=5):
    """Rebuild the echo from principal components ``drop_leading+1 .. drop_leading+keep``.

    The leading component carries the static clutter; components past the
    numerical rank have zero singular value and contribute nothing.
    """
    m, n = echo.data.shape
    if drop_leading < 0 or keep < 1:
        raise InvalidArgumentError("need drop_leading >= 0 and keep >= 1")
    if drop_leading + keep > min(m, n):
        raise InvalidArgumentError(
            f"requested components {drop_leading + 1}..{drop_leading + keep} but the "
            f"{m}x{n} echo has at most {min(m, n)}")
    u, s, vt = pca_components(echo.data)
    sel = slice(drop_leading, drop_leading + keep)
    return echo.with_data((u[:, sel] * s[sel]) @ vt[sel])


# ---------------------------------------------------------------------------
# EMD
# ---------------------------------------------------------------------------


def find_extrema(x):
    """Indices of interior local maxima and minima; flat plateaus count once at their centre."""
    x = np.asarray(x, dtype=np.float64)
    d = np.diff(x)
    nz = np.flatnonzero(d != 0)
    if nz.size < 2:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    s = np.sign(d[nz])
    turns = np.flatnonzero(s[:-1] != s[1:])
    centre = (nz[turns] + 1 + nz[turns + 1]) // 2
    is_max = s[turns] > 0
    return centre[is_max], centre[~is_max]


def count_zero_crossings(x):
    s = np.sign(np.asarray(x, dtype=np.float64))
    s = s[s != 0]
    return int(np.count_nonzero(s[:-1] != s[1:]))


def _is_monotone(x):
    d = np.diff(x)
    return bool(np.all(d >= 0) or np.all(d <= 0))


def envelope(signal, which="upper", kind="cubic_spline"):
    """Curve through the maxima (``upper``) or minima (``lower``) of ``signal``.

    The first and last extrema are mirrored about the signal ends to tame
    end effects. Without interior extrema the envelope is the straight
    line through the two endpoints.
    """
    x = np.asarray(signal, dtype=np.float64)
    n = x.size
    if n < 2:
        raise DegenerateSignalError("envelope needs at least 2 samples")
    maxima, minima = find_extrema(x)
    if which == "upper":
        idx = maxima
    elif which == "lower":
        idx = minima
    else:
        raise InvalidArgumentError(f"which must be 'upper' or 'lower', got {which!r}")
    if idx.size == 0:
        knots_t = np.array([0.0, n - 1.0])
        knots_v = x[[0, -1]]
    else:
        knots_t = np.concatenate([[-float(idx[0])], idx.astype(float),
                                  [2.0 * (n - 1) - idx[-1]]])
        knots_v = np.concatenate([[x[idx[0]]], x[idx], [x[idx[-1]]]])
        # mirrored knots coincide with real ones when an extremum sits on an endpoint
        knots_t, uniq = np.unique(knots_t, return_index=True)
        knots_v = knots_v[uniq]
    if knots_t.size < 2:
        raise DegenerateSignalError("fewer than 2 usable extrema")
    grid = np.arange(n, dtype=np.float64)
    if kind == "linear":
        return np.interp(grid, knots_t, knots_v)
    if kind == "cubic_spline":
        return CubicSpline(knots_t, knots_v, bc_type="natural")(grid)
    raise InvalidArgumentError(f"unknown envelope kind {kind!r}")


def is_imf(signal, tol=0.05, kind="cubic_spline"):
    x = np.asarray(signal, dtype=np.float64)
    if x.size < 4:
        raise InvalidArgumentError("is_imf needs at least 4 samples")
    maxima, minima = find_extrema(x)
    if abs(maxima.size + minima.size - count_zero_crossings(x)) > 1:
        return False
    mean_env = 0.5 * (envelope(x, "upper", kind) + envelope(x, "lower", kind))
    return bool(np.max(np.abs(mean_env)) <= tol * np.max(np.abs(x)))


@dataclass
class EmdConfig:
    max_imfs: int = 10
    sift_sd_threshold: float = 0.3
    max_sift_iters: int = 100
    envelope: str = "cubic_spline"

    def __post_init__(self):
        if self.max_imfs < 1:
            raise InvalidArgumentError("max_imfs must be >= 1")
        if self.sift_sd_threshold <= 0:
            raise InvalidArgumentError("sift_sd_threshold must be positive")
        if self.max_sift_iters < 1:
            raise InvalidArgumentError("max_sift_iters must be >= 1")
        if self.envelope not in ("cubic_spline", "linear"):
            raise InvalidArgumentError(f"unknown envelope kind {self.envelope!r}")


@dataclass
class EmdResult:
    imfs: list
    residual: np.ndarray
    sift_iterations: list = field(default_factory=list)
    capped: list = field(default_factory=list)  # IMF indices that hit max_sift_iters

    def reconstruct(self):
        return np.sum(self.imfs, axis=0) + self.residual if self.imfs else self.residual.copy()


def emd_decompose(signal, cfg=None):
    """Split ``signal`` into IMFs (high frequency first) plus a residual trend.

    Sifting stops once the Cauchy-type change ratio drops below
    ``sift_sd_threshold`` and the candidate passes :func:`is_imf` at that
    tolerance, or after ``max_sift_iters``. Decomposition stops when the
    residual is monotone or has fewer than 3 extrema.
    """
    cfg = cfg or EmdConfig()
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1 or x.size < 8:
        raise InvalidArgumentError("emd_decompose needs a 1-D signal of length >= 8")
    residual = x.copy()
    result = EmdResult([], residual)
    while len(result.imfs) < cfg.max_imfs:
        maxima, minima = find_extrema(residual)
        if _is_monotone(residual) or maxima.size + minima.size < 3:
            break
        h = residual.copy()
        for it in range(1, cfg.max_sift_iters + 1):
            mean_env = 0.5 * (envelope(h, "upper", cfg.envelope) +
                              envelope(h, "lower", cfg.envelope))
            h_new = h - mean_env
            denom = np.sum(h * h)
            sd = np.sum((h - h_new) ** 2) / denom if denom > 0 else 0.0
            h = h_new
            if sd < cfg.sift_sd_threshold and is_imf(h, cfg.sift_sd_threshold, cfg.envelope):
                break
        else:
            result.capped.append(len(result.imfs))
            logger.debug("IMF %d hit the sifting cap", len(result.imfs))
        result.sift_iterations.append(it)
        result.imfs.append(h)
        residual = residual - h
    result.residual = residual
    return result


# ---------------------------------------------------------------------------
# correlation and smoothing
# ---------------------------------------------------------------------------


@dataclass
class CorrelationSeries:
    lags: np.ndarray
    values: np.ndarray

    def at(self, lag):
        return float(self.values[lag - self.lags[0]])


def cross_correlate(x, y):
    """``r[m] = sum_n x[n] y[n + m]`` over the finite overlap, for every lag."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size == 0 or y.size == 0:
        raise InvalidArgumentError("cross_correlate needs non-empty inputs")
    values = np.correlate(y, x, mode="full")
    lags = np.arange(-(x.size - 1), y.size)
    return CorrelationSeries(lags, values)


def moving_average(seq, H=5):
    """Centred mean over ``H`` samples, windows shrinking at the edges."""
    x = np.asarray(seq, dtype=np.float64)
    if H < 1 or H % 2 == 0:
        raise InvalidArgumentError(f"smoothing width H must be a positive odd count, got {H}")
    n = x.size
    if n == 0 or H == 1:
        return x.copy()
    half = H // 2
    acc = np.zeros(n)
    count = np.zeros(n)
    idx = np.arange(n)
    for off in range(-half, half + 1):
        j = idx + off
        ok = (j >= 0) & (j < n)
        acc[ok] += x[j[ok]] - x[ok]
        count[ok] += 1
    # deviations from the centre sample keep constant runs exactly fixed
    return np.clip(x + acc / count, x.min(), x.max())


# ---------------------------------------------------------------------------
# fusion windows
# ---------------------------------------------------------------------------


@dataclass
class FusionSample:
    """(3, 2, G) raw/smoothed probability windows for one decision step."""

    branches: np.ndarray
    label: int
    weight: float = 1.0
    end_step: int = 0


def window_arrays(streams, G, H=5, strict=False):
    """Vectorised windows: ``X`` (L-G, 3, 2, G), ``y`` (L-G,), ``end_steps``."""
    L = len(streams)
    if G < 1:
        raise InvalidArgumentError("G must be >= 1")
    if L <= G:
        raise InvalidArgumentError(f"stream length {L} must exceed window width G={G}")
    if not RECOMMENDED_G[0] <= G <= RECOMMENDED_G[1]:
        if strict:
            raise InvalidArgumentError(f"G={G} outside the recommended range {RECOMMENDED_G}")
        logger.info("G=%d outside the recommended range %s", G, RECOMMENDED_G)
    raw = streams.probs
    smooth = np.stack([moving_average(p, H) for p in raw])
    both = np.stack([raw, smooth], axis=1)  # (3, 2, L)
    n = L - G
    view = np.lib.stride_tricks.sliding_window_view(both, G, axis=2)[:, :, :n]  # (3, 2, n, G)
    X = np.ascontiguousarray(view.transpose(2, 0, 1, 3))
    end_steps = np.arange(n) + G - 1
    return X, streams.labels[end_steps].copy(), end_steps


def make_windows(streams, G=64, H=5, strict=False):
    """``L - G`` samples; sample k covers steps [k, k+G) and is labelled at step k+G-1."""
    X, y, ends = window_arrays(streams, G, H, strict)
    return [FusionSample(X[k], int(y[k]), 1.0, int(ends[k])) for k in range(len(y))]


def stack_samples(samples):
    """``(X, y, w)`` arrays from a list of :class:`FusionSample`."""
    if not samples:
        raise InvalidArgumentError("no samples")
    X = np.stack([s.branches for s in samples])
    y = np.array([s.label for s in samples], dtype=np.float64)
    w = np.array([s.weight for s in samples], dtype=np.float64)
    return X, y, w
