"""Gibbons-Hawking potential, its harmonicity, and the existence criterion.

The potential is the superposition of Newton kernels

    V(x) = c * sum_j |e_j| / |x - p_j|

with ``c = 1/(4 pi)`` ("quarter_pi") or ``c = 1/2`` ("half"). Both
normalizations describe the same function up to the factor 2 pi.

The existence criterion is decided through the counting function
``n(t) = sum_{|p_j| <= t} |e_j|`` of the atomic Riesz measure, whose weighted
integral has the closed form

    int_1^inf n(t)/t^2 dt = sum_{|p_j|<=1} |e_j| + sum_{|p_j|>1} |e_j|/|p_j|.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from .config import PunctureConfig
from .errors import PunctureEvaluationError, StepTooLargeError

NORMALIZATIONS = {"quarter_pi": 1.0 / (4.0 * np.pi), "half": 0.5}


def kernel_constant(normalization: str = "quarter_pi") -> float:
    try:
        return NORMALIZATIONS[normalization]
    except KeyError:
        raise ValueError(f"unknown normalization {normalization!r}") from None


def _offsets(config: PunctureConfig, x):
    """Return x - p_j with shape (..., n, 3) and the distances (..., n)."""
    x = np.asarray(x, dtype=float)
    d = x[..., None, :] - config.points
    r = np.linalg.norm(d, axis=-1)
    if r.size and np.any(r == 0):
        flat = r.reshape(-1, r.shape[-1])
        row = int(np.argmax(np.any(flat == 0, axis=1)))
        raise PunctureEvaluationError(int(np.argmin(flat[row])), 0.0)
    return d, r


def nearest_puncture(config: PunctureConfig, x):
    """Index of and distance to the nearest center (single point)."""
    r = np.linalg.norm(np.asarray(x, dtype=float) - config.points, axis=1)
    j = int(np.argmin(r))
    return j, float(r[j])


def eval_potential(config: PunctureConfig, x, normalization: str = "quarter_pi"):
    """Truncated potential at ``x`` (shape (3,) or (m, 3))."""
    c = kernel_constant(normalization)
    _, r = _offsets(config, x)
    return c * np.sum(np.abs(config.weights) / r, axis=-1)


def grad_potential(config: PunctureConfig, x, normalization: str = "quarter_pi"):
    """Analytic gradient  -c * sum |e_j| (x - p_j) / |x - p_j|^3."""
    c = kernel_constant(normalization)
    d, r = _offsets(config, x)
    w = np.abs(config.weights) / r**3
    return -c * np.sum(w[..., None] * d, axis=-2)


_AXES = np.eye(3)


def fd_laplacian(config: PunctureConfig, x, h: float, normalization: str = "quarter_pi"):
    """Central 7-point Laplacian of the truncated potential."""
    x = np.asarray(x, dtype=float)
    v0 = eval_potential(config, x, normalization)
    acc = -6.0 * v0
    for e in _AXES:
        acc = acc + eval_potential(config, x + h * e, normalization)
        acc = acc + eval_potential(config, x - h * e, normalization)
    return acc / h**2


def _check_clearance(config, x, h, factor=10.0):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    r = np.linalg.norm(x[:, None, :] - config.points, axis=-1)
    dmin = r.min(axis=1)
    bad = dmin <= factor * h
    if np.any(bad):
        k = int(np.argmax(bad))
        raise StepTooLargeError(
            f"step h={h:g} too large: point {k} is {dmin[k]:.3e} from puncture "
            f"{int(np.argmin(r[k]))}, need > {factor:g}h"
        )


def laplacian_residual(config: PunctureConfig, x, h: float = 1e-3, normalization: str = "quarter_pi"):
    """|FD Laplacian| at x. Requires every center to be farther than 10h.

    For a harmonic function the residual is pure truncation error, O(h^2).
    """
    if not h > 0:
        raise StepTooLargeError("h must be positive")
    _check_clearance(config, x, h)
    return np.abs(fd_laplacian(config, x, h, normalization))


# ------------------------------------------------------------- Riesz measure

@dataclass(frozen=True)
class CountingFunction:
    """n(t) = total |e_j| over centers in the closed ball of radius t."""

    thresholds: np.ndarray  # distinct radii, sorted
    cumulative: np.ndarray  # n at each threshold

    def __call__(self, t):
        idx = np.searchsorted(self.thresholds, t, side="right")
        padded = np.concatenate([[0.0], self.cumulative])
        return padded[idx]


def counting_function(config: PunctureConfig) -> CountingFunction:
    radii = config.radii
    w = np.abs(config.weights).astype(float)
    uniq, inv = np.unique(radii, return_inverse=True)
    mass = np.bincount(inv, weights=w, minlength=len(uniq))
    return CountingFunction(uniq, np.cumsum(mass))


def riesz_integral(config: PunctureConfig) -> float:
    """Closed form of int_1^inf n(t)/t^2 dt over the truncation.

    Centers with |p_j| == 1 exactly count in the finite part (closed balls).
    """
    radii = config.radii
    w = np.abs(config.weights).astype(float)
    inner = radii <= 1.0
    return float(np.sum(w[inner]) + np.sum(w[~inner] / radii[~inner]))


def riesz_quadrature(config: PunctureConfig, T: float) -> float:
    """Numerical quadrature of int_1^T n(t)/t^2 dt, interval by interval.

    Independent of the telescoped closed form; used as its oracle.
    """
    if T < 1:
        raise ValueError("upper limit must be >= 1")
    n = counting_function(config)
    cuts = n.thresholds[(n.thresholds > 1.0) & (n.thresholds < T)]
    knots = np.concatenate([[1.0], cuts, [T]])
    total = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        if b <= a:
            continue
        level = float(n(0.5 * (a + b)))
        if level == 0.0:
            continue
        val, _ = integrate.quad(lambda t: level / t**2, a, b, epsabs=0.0, epsrel=1e-13)
        total += val
    return total


def riesz_split(config: PunctureConfig, T: float) -> float:
    """Quadrature up to T plus the exact remainder n(T)/T + sum_{|p|>T}|e|/|p|."""
    radii = config.radii
    w = np.abs(config.weights).astype(float)
    outer = radii > T
    n_T = float(np.sum(w[~outer]))
    return riesz_quadrature(config, T) + n_T / T + float(np.sum(w[outer] / radii[outer]))


# ---------------------------------------------------------------- criterion

@dataclass(frozen=True)
class CriterionVerdict:
    accepted: bool
    reason: str  # ok | positive_weight | tail_divergent | tail_unknown
    series_value: float
    tail_bound: Optional[float] = None
    index: Optional[int] = None  # offending puncture for positive_weight

    def to_dict(self):
        return {
            "accepted": self.accepted,
            "reason": self.reason,
            "index": self.index,
            "series_value": self.series_value,
            "tail_bound": self.tail_bound,
        }


def tail_bound(config: PunctureConfig) -> Optional[float]:
    """Bound on sum_{j>N} |e_j|/|p_j| implied by the tail model.

    Returns ``inf`` for a divergent model and ``None`` when the model is
    absent or of kind ``none``.
    """
    t = config.tail
    if t is None or t.kind == "none":
        return None
    if t.kind == "custom":
        return float(t.param)
    n = len(config)
    if n == 0:
        return None
    a = n if t.anchor is None else min(t.anchor, n)
    r_a = float(config.radii[a - 1])
    w = float(abs(config.weights[a - 1])) or 1.0
    if r_a == 0:
        return float("inf")
    if t.kind == "geometric":
        q = t.param
        # sum_{j>n} w / (r_a q^{j-a})
        return w / r_a * q ** (-(n - a)) / (q - 1.0)
    # powerlaw: |p_j| ~ r_a (j/a)^s
    s = t.param
    if s <= 1:
        return float("inf")
    return w * a**s / r_a * n ** (1.0 - s) / (s - 1.0)


def check_criterion(config: PunctureConfig) -> CriterionVerdict:
    """Decide whether the weights admit a positive harmonic potential.

    A configuration without a tail model is a genuinely finite one and the
    truncation sum decides; ``TailModel('none')`` marks an infinite sequence
    of unknown growth.
    """
    series = riesz_integral(config)
    pos = np.flatnonzero(config.weights > 0)
    bound = tail_bound(config)
    if pos.size:
        return CriterionVerdict(False, "positive_weight", series, bound, int(pos[0]))
    if not np.isfinite(series):
        return CriterionVerdict(False, "tail_divergent", series, bound)
    if config.tail is None:
        return CriterionVerdict(True, "ok", series, 0.0)
    if bound is None:
        return CriterionVerdict(False, "tail_unknown", series, None)
    if not np.isfinite(bound):
        return CriterionVerdict(False, "tail_divergent", series, bound)
    return CriterionVerdict(True, "ok", series, bound)
