"""Weierstrass elementary factors and entire functions with prescribed zeros.

    E_0(z) = 1 - z,   E_m(z) = (1 - z) exp(z + z^2/2 + ... + z^m/m)

    P(u) = u^delta * prod_k E_{l_k}(u / b_k)^{m_k}

Products are accumulated in log space. For |z| <= 1/2 the logarithm is
taken from the power series  log E_m(z) = -sum_{k>m} z^k / k, which also
gives the tail estimate |log E_m(z)| <= |z|^{m+1} / (1 - |z|).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ContourThroughZeroError, ConvergenceError, InvalidParameterError

PAPER_INDEX = "paper_index"
MINIMAL_GENUS = "minimal_genus"

_SERIES_RADIUS = 0.5
_SERIES_TERMS = 60  # 2^-60 < machine epsilon
RHO_MARGIN = 0.1


def log_weierstrass_factor(m: int, z):
    """log E_m(z) (a branch; only exp of integer multiples is ever used). -inf at z = 1."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    small = np.abs(z) <= _SERIES_RADIUS
    if np.any(small):
        zs = z[small]
        k = np.arange(m + 1, m + 1 + _SERIES_TERMS)
        # -sum_{k>m} z^k / k, Horner in z
        acc = np.zeros_like(zs)
        for kk in k[::-1]:
            acc = acc * zs + 1.0 / kk
        out[small] = -acc * zs ** (m + 1)
    big = ~small
    if np.any(big):
        zb = z[big]
        with np.errstate(divide="ignore"):
            val = np.log(1.0 - zb)
        poly = np.zeros_like(zb)
        for kk in range(m, 0, -1):
            poly = (poly + 1.0 / kk) * zb
        out[big] = val + poly
        out[big] = np.where(zb == 1.0, -np.inf + 0j, out[big])
    return out if out.ndim else out[()]


def weierstrass_factor(m: int, z):
    """E_m(z)."""
    if m < 0:
        raise InvalidParameterError("factor order must be >= 0")
    lg = log_weierstrass_factor(m, z)
    return np.exp(lg)


def factor_log_bound(m: int, r):
    """Upper bound on |log E_m(z)| for |z| <= r <= 1/2."""
    r = np.asarray(r, dtype=float)
    return r ** (m + 1) / (1.0 - r)


# ------------------------------------------------------------------ products

@dataclass(frozen=True, eq=False)
class EntireProduct:
    zeros: np.ndarray  # nonzero b_k, ordered by modulus (minimal_genus) or index (paper_index)
    mult: np.ndarray  # m_k >= 1
    genus: np.ndarray  # l_k >= 0
    delta: int = 0  # order of the zero at the origin
    mode: str = PAPER_INDEX
    truncation: int = 0  # N: factors k < N are evaluated
    radius: float = math.inf  # certified working disk |u| <= R
    tail_log_bound: float = 0.0
    tol: Optional[float] = None

    @property
    def active(self):
        """(zeros, multiplicities, genera) of the evaluated factors."""
        N = self.truncation
        return self.zeros[:N], self.mult[:N], self.genus[:N]

    def to_dict(self):
        return {
            "delta": int(self.delta),
            "zeros": [
                {"b": [float(b.real), float(b.imag)], "m": int(m), "genus": int(l)}
                for b, m, l in zip(self.zeros, self.mult, self.genus)
            ],
            "mode": self.mode,
            "N": int(self.truncation),
            "R": None if math.isinf(self.radius) else float(self.radius),
            "tail_log_bound": float(self.tail_log_bound),
        }


def convergence_exponent(moduli: np.ndarray, mult: np.ndarray) -> float:
    """Estimated exponent of convergence: slope of log(count) against log(radius)
    over the outer half of the zeros (those beyond radius 1)."""
    order = np.argsort(moduli, kind="stable")
    r = moduli[order]
    cnt = np.cumsum(mult[order])
    sel = np.arange(len(r)) >= len(r) // 2
    sel &= r > 1.0
    if np.count_nonzero(sel) < 3:
        return 0.0
    x, y = np.log(r[sel]), np.log(cnt[sel])
    if np.ptp(x) == 0:
        return math.inf
    slope = np.polyfit(x, y, 1)[0]
    return max(float(slope), 0.0)


def _check_accumulation(zeros: np.ndarray, rel: float = 1e-6):
    """Distinct zeros closer than rel * modulus mean the moduli are not diverging."""
    if len(zeros) < 2:
        return
    order = np.argsort(np.abs(zeros), kind="stable")
    z = zeros[order]
    mod = np.abs(z)
    # candidates are neighbours in modulus; a sort on modulus alone can
    # separate near points, so compare a small window
    for w in range(1, min(4, len(z))):
        gap = np.abs(z[w:] - z[:-w])
        close = gap < rel * np.maximum(mod[w:], mod[:-w])
        if np.any(close):
            k = int(np.argmax(close))
            raise ConvergenceError(
                f"zeros {z[k]!r} and {z[k + w]!r} are distinct but {gap[k]:.2e} apart: "
                "the zero set appears to accumulate"
            )


def _tail_suffix(ratio: np.ndarray, mult: np.ndarray, genus: np.ndarray) -> np.ndarray:
    """suffix[k] = sum_{i >= k} m_i * bound(l_i, ratio_i); suffix[len] = 0."""
    terms = mult * factor_log_bound(genus, ratio)
    return np.concatenate([np.cumsum(terms[::-1])[::-1], [0.0]])


def build_product(source, mode: str = PAPER_INDEX, radius: float | None = None,
                  tol: float = 1e-10, delta: int | None = None,
                  accumulation_flag: bool = False) -> EntireProduct:
    """Entire function with the zeros of a projection report or an explicit list.

    ``source`` is a ``ProjectionReport`` or a sequence of ``(b, m)`` pairs.
    ``paper_index`` uses l_k = k (1-based position) and evaluates every zero.
    ``minimal_genus`` needs ``radius``; it takes the smallest uniform genus
    exceeding the estimated exponent of convergence, then the smallest
    truncation N for which the dropped zeros (all with |b| >= 2R) carry a
    certified log-error below ``tol`` on |u| <= R.
    """
    if hasattr(source, "clusters"):
        accumulation_flag = accumulation_flag or source.accumulation_flag
        delta = source.m0 if delta is None else delta
        pairs = [(c.b, c.m) for c in source.clusters if c.b != 0]
        positions = [k for k, c in enumerate(source.clusters, start=1) if c.b != 0]
    else:
        pairs = [(complex(b), int(m)) for b, m in source]
        positions = list(range(1, len(pairs) + 1))
        if delta is None:
            delta = 0
    if accumulation_flag:
        raise ConvergenceError("projection report flags accumulation of the zeros")
    zeros = np.array([p[0] for p in pairs], dtype=complex)
    mult = np.array([p[1] for p in pairs], dtype=np.int64)
    if np.any(zeros == 0):
        raise InvalidParameterError("zeros must be nonzero; use delta for the origin")
    if np.any(mult < 1):
        raise InvalidParameterError("multiplicities must be >= 1")
    if delta < 0:
        raise InvalidParameterError("delta must be >= 0")
    _check_accumulation(zeros)

    if mode == PAPER_INDEX:
        genus = np.array(positions, dtype=np.int64)
        N = len(zeros)
        if radius is None:
            return EntireProduct(zeros, mult, genus, int(delta), mode, N, math.inf, 0.0, None)
        return EntireProduct(zeros, mult, genus, int(delta), mode, N, float(radius), 0.0, tol)

    if mode != MINIMAL_GENUS:
        raise InvalidParameterError(f"unknown mode {mode!r}")
    if radius is None or not radius > 0:
        raise InvalidParameterError("minimal_genus mode needs a working radius R > 0")
    order = np.argsort(np.abs(zeros), kind="stable")
    zeros, mult = zeros[order], mult[order]
    mod = np.abs(zeros)
    rho = convergence_exponent(mod, mult)
    if not math.isfinite(rho):
        raise ConvergenceError("zero moduli do not grow")
    # smallest l with l + 1 > rho, with slack for the noisy slope estimate
    ell = max(0, int(math.floor(rho + RHO_MARGIN)))
    genus = np.full(len(zeros), ell, dtype=np.int64)
    guard = int(np.searchsorted(mod, 2.0 * radius, side="left"))
    ratio = np.minimum(radius / np.where(mod > 0, mod, np.inf), _SERIES_RADIUS)
    suffix = _tail_suffix(ratio, mult, genus)
    N = len(zeros)
    for k in range(guard, len(zeros) + 1):
        if suffix[k] <= tol:
            N = k
            break
    return EntireProduct(zeros, mult, genus, int(delta), mode, N, float(radius), float(suffix[N]), tol)


def log_product(P: EntireProduct, u, upto: int | None = None):
    """log P(u) summed factor by factor; -inf (real part) at zeros."""
    u = np.asarray(u, dtype=complex)
    N = P.truncation if upto is None else upto
    acc = np.zeros(u.shape, dtype=complex)
    if P.delta:
        with np.errstate(divide="ignore"):
            acc = acc + _scaled(np.log(u), P.delta)
    for b, m, ell in zip(P.zeros[:N], P.mult[:N], P.genus[:N]):
        acc = acc + _scaled(log_weierstrass_factor(int(ell), u / b), m)
    return acc


def _scaled(lg, k):
    # k * lg without the nan that complex multiplication puts in -inf + 0j
    lg = np.asarray(lg, dtype=complex)
    return lg.real * float(k) + 1j * (lg.imag * float(k))


def _exp_log(lg):
    lg = np.asarray(lg, dtype=complex)
    with np.errstate(invalid="ignore"):
        val = np.exp(lg)
    return np.where(np.isneginf(lg.real), 0j, val)


def eval_product(P: EntireProduct, u):
    """(value, log_abs_error_bound) of the truncated product at u.

    The bound is P.tail_log_bound inside the certified disk and inf outside.
    """
    u = np.asarray(u, dtype=complex)
    val = _exp_log(log_product(P, u))
    inside = np.abs(u) <= P.radius
    bound = np.where(inside, P.tail_log_bound, np.inf)
    if val.ndim == 0:
        return complex(val), float(bound)
    return val, bound


def product_value(P: EntireProduct, u):
    return eval_product(P, u)[0]


def product_derivative(P: EntireProduct, u: complex, samples: int = 256, radius: float | None = None) -> complex:
    """P'(u) by the Cauchy integral over a small circle (trapezoid rule)."""
    if radius is None:
        pts = np.concatenate([P.active[0], [0.0]]) if P.delta else P.active[0]
        d = np.abs(pts - u)
        d = d[d > 0]
        radius = 0.25 * (d.min() if d.size else 1.0)
    t = np.exp(2j * np.pi * np.arange(samples) / samples)
    vals = product_value(P, u + radius * t)
    return complex(np.mean(vals / (radius * t)))


# ------------------------------------------------------------------ winding

def winding_number(f, center: complex, radius: float, samples: int = 4096, max_samples: int = 1 << 20):
    """Total phase change of f around the circle, in turns.

    ``f`` returns log-values (complex); increments of the imaginary part are
    reduced to (-pi, pi]. Sampling doubles while any increment exceeds pi/2.
    """
    n = max(int(samples), 4096)
    while True:
        t = np.exp(2j * np.pi * np.arange(n + 1) / n)
        lg = f(center + radius * t)
        ph = np.imag(lg)
        dph = np.angle(np.exp(1j * np.diff(ph)))
        if np.max(np.abs(dph)) <= np.pi / 2 or n >= max_samples:
            return int(round(float(np.sum(dph)) / (2.0 * np.pi)))
        n *= 2


def log_linear_part(P: EntireProduct, u):
    """delta log u + sum m_k log(1 - u/b_k): log P minus its exponential factors.

    Each exp(sum z^j/j) is single valued, so this has the same winding as log P
    on any circle, without the huge phases of high-genus factors far from
    their zero.
    """
    u = np.asarray(u, dtype=complex)
    acc = np.zeros(u.shape, dtype=complex)
    if P.delta:
        with np.errstate(divide="ignore"):
            acc = acc + _scaled(np.log(u), P.delta)
    zs, ms, _ = P.active
    for b, m in zip(zs, ms):
        with np.errstate(divide="ignore"):
            acc = acc + _scaled(np.log1p(-u / b), m)
    return acc


def zero_audit(P: EntireProduct, center: complex, radius: float, samples: int = 4096) -> int:
    """Argument-principle count of the zeros of the truncated product inside the circle."""
    zs = list(P.active[0])
    if P.delta:
        zs.append(0j)
    zs = np.asarray(zs, dtype=complex)
    if zs.size:
        gap = np.abs(np.abs(zs - center) - radius)
        if np.min(gap) < 1e-6 * radius:
            raise ContourThroughZeroError(f"a zero lies within {np.min(gap):.2e} of the contour")
    return winding_number(lambda u: log_linear_part(P, u), center, radius, samples)


def zeros_inside(P: EntireProduct, center: complex, radius: float) -> int:
    """Direct count of multiplicity inside the circle (oracle for zero_audit)."""
    zs, ms, _ = P.active
    total = int(np.sum(ms[np.abs(zs - center) < radius]))
    if P.delta and abs(center) < radius:
        total += P.delta
    return total
