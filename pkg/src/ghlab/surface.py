"""Hypersurface model u1 u2 = P(u3), its chart atlas and the A-chain data.

Chart labels are ``"minus"``, ``"plus"`` and ``(k, l)`` with ``1 <= l <= m_k - 1``
for every zero of multiplicity ``m_k >= 2``. Zero ``k = 0`` is the origin
(multiplicity ``delta``); ``k = 1..N`` are the evaluated zeros of the product
in product order. The factors are

    F_0(u) = u,    F_k(u) = E_{l_k}(u / b_k),

so that ``P = prod_r F_r^{m_r}``. Chart ``alpha`` carries the index function

    J_r(minus) = 0,  J_r(plus) = m_r,  J_k((k, l)) = l,  J_r((k, l)) = 0 (r != k),

and the gluing is ``(u, v_alpha) ~ (u, f_{alpha beta}(u) v_alpha)`` in chart beta with

    f_{alpha beta} = prod_r F_r^{J_r(alpha) - J_r(beta)}.

The chart map is ``chi_alpha(u, v) = (P / (G_alpha v), G_alpha v, u)`` with
``G_alpha = prod_r F_r^{J_r(alpha)}``; then ``chi_beta(u, f_{alpha beta} v) =
chi_alpha(u, v)`` holds identically.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .entire import (
    EntireProduct,
    _exp_log,
    _scaled,
    eval_product,
    log_weierstrass_factor,
    product_derivative,
    winding_number,
)
from .errors import PoleError, ZeroFibreError, ZeroSeparationError

MINUS = "minus"
PLUS = "plus"

# Chen-Chen chart names for the two-center example
CHEN_CHEN_CHARTS = {"M1": MINUS, "M2": (0, 1), "M3": PLUS}


def chart_name(alpha) -> str:
    if isinstance(alpha, str):
        return alpha
    k, l = alpha
    return f"{k}_{l}"


# ------------------------------------------------------------------- atlas

@dataclass(frozen=True, eq=False)
class ChartAtlas:
    product: EntireProduct
    charts: tuple  # minus, (k, l) in lexicographic order, plus
    exponents: dict = field(repr=False)  # chart -> J_r for r = 0..N
    zero_points: np.ndarray = field(repr=False)  # b_r, with b_0 = 0
    zero_orders: np.ndarray = field(repr=False)  # m_r, with m_0 = delta

    def J(self, alpha) -> np.ndarray:
        try:
            return self.exponents[alpha]
        except KeyError:
            raise KeyError(f"unknown chart {alpha!r}") from None

    @property
    def index_table(self) -> dict:
        return {chart_name(a): [int(j) for j in self.exponents[a]] for a in self.charts}

    def to_dict(self):
        return {"charts": [chart_name(a) for a in self.charts], "index_table": self.index_table}


def build_atlas(P: EntireProduct) -> ChartAtlas:
    zs, ms, _ = P.active
    points = np.concatenate([[0j], zs]).astype(complex)
    orders = np.concatenate([[int(P.delta)], ms]).astype(np.int64)
    R = len(points)
    exps = {MINUS: np.zeros(R, dtype=np.int64)}
    middle = []
    for k in range(R):
        for l in range(1, int(orders[k])):
            J = np.zeros(R, dtype=np.int64)
            J[k] = l
            exps[(k, l)] = J
            middle.append((k, l))
    exps[PLUS] = orders.copy()
    for J in exps.values():
        J.setflags(write=False)
    charts = (MINUS, *middle, PLUS)
    return ChartAtlas(P, charts, exps, points, orders)


def _log_factors(atlas: ChartAtlas, u) -> np.ndarray:
    """log F_r(u) stacked along the first axis, shape (N+1,) + u.shape."""
    u = np.asarray(u, dtype=complex)
    P = atlas.product
    out = np.empty((len(atlas.zero_points),) + u.shape, dtype=complex)
    with np.errstate(divide="ignore"):
        out[0] = np.log(u)
    for r, (b, ell) in enumerate(zip(P.zeros[: P.truncation], P.genus[: P.truncation]), start=1):
        out[r] = log_weierstrass_factor(int(ell), u / b)
    return out


def _combine(logs: np.ndarray, exps: np.ndarray, u):
    """exp(sum_r exps[r] log F_r); PoleError where a vanishing factor has a negative power."""
    acc = np.zeros(logs.shape[1:], dtype=complex)
    for r, e in enumerate(exps):
        if e == 0:
            continue
        lg = logs[r]
        if e < 0 and np.any(np.isneginf(lg.real)):
            raise PoleError(f"factor {r} vanishes at u = {np.asarray(u).ravel()[np.argmax(np.isneginf(lg.real).ravel())]} with power {e}")
        acc = acc + _scaled(lg, int(e))
    return _exp_log(acc)


def transition(atlas: ChartAtlas, alpha, beta, u):
    """f_{alpha beta}(u); the fibre coordinate in chart beta is f * v_alpha."""
    exps = atlas.J(alpha) - atlas.J(beta)
    val = _combine(_log_factors(atlas, u), exps, u)
    return complex(val) if val.ndim == 0 else val


def cocycle_check(atlas: ChartAtlas, alpha, beta, gamma, u):
    """|f_ab f_bg - f_ag| / |f_ag|."""
    if alpha == beta == gamma:
        return 0.0 if np.ndim(u) == 0 else np.zeros(np.shape(u))
    fab = transition(atlas, alpha, beta, u)
    fbg = transition(atlas, beta, gamma, u)
    fag = transition(atlas, alpha, gamma, u)
    res = np.abs(fab * fbg - fag) / np.abs(fag)
    return float(res) if np.ndim(res) == 0 else res


def _separation(atlas: ChartAtlas, k: int) -> float:
    pts = atlas.zero_points[atlas.zero_orders > 0]
    d = np.abs(pts - atlas.zero_points[k])
    d = d[d > 0]
    return float(d.min()) if d.size else 1.0


def pole_order(atlas: ChartAtlas, alpha, beta, k: int, min_radius: float = 1e-12) -> int:
    """Signed winding of f_{alpha beta} around zero k (k = 0 is the origin).

    The circle has a quarter of the distance to the nearest other zero as
    radius. Equals J_k(alpha) - J_k(beta); negative values are poles.
    The exponential part of each E-factor is single valued and adds no
    winding, so only the linear parts u and (1 - u/b_r) are sampled; this
    keeps high-genus factors far from their zero from swamping the phase.
    """
    center = complex(atlas.zero_points[k])
    radius = 0.25 * _separation(atlas, k)
    if radius < min_radius * max(1.0, abs(center)):
        raise ZeroSeparationError(f"zero {k} is too close to its neighbours (radius {radius:.2e})")
    exps = atlas.J(alpha) - atlas.J(beta)
    pts = atlas.zero_points

    def logf(u):
        acc = np.zeros(np.shape(u), dtype=complex)
        if exps[0]:
            acc = acc + _scaled(np.log(u), int(exps[0]))
        for r in np.flatnonzero(exps[1:]) + 1:
            acc = acc + _scaled(np.log1p(-u / pts[r]), int(exps[r]))
        return acc

    return winding_number(logf, center, radius)


def _gauge(atlas: ChartAtlas, alpha, u):
    """(G_alpha, P / G_alpha), both as products with nonnegative powers."""
    logs = _log_factors(atlas, u)
    J = atlas.J(alpha)
    return _combine(logs, J, u), _combine(logs, atlas.zero_orders - J, u)


def chi_map(atlas: ChartAtlas, alpha, u, v):
    """Image (u1, u2, u3) of the chart point (u, v) on u1 u2 = P(u3)."""
    v = np.asarray(v, dtype=complex)
    if np.any(v == 0):
        raise ZeroFibreError("fibre coordinate must be nonzero")
    u = np.asarray(u, dtype=complex)
    G, Q = _gauge(atlas, alpha, u)
    out = (Q / v, G * v, u + 0 * v)
    if np.ndim(out[0]) == 0:
        return tuple(complex(c) for c in out)
    return out


def surface_residual(P: EntireProduct, u1, u2, u3, relative: bool = False):
    """|u1 u2 - P(u3)|, optionally divided by max(|u1 u2|, |P(u3)|)."""
    lhs = np.asarray(u1, dtype=complex) * np.asarray(u2, dtype=complex)
    rhs = eval_product(P, u3)[0]
    res = np.abs(lhs - rhs)
    if relative:
        scale = np.maximum(np.abs(lhs), np.abs(rhs))
        res = np.where(scale > 0, res / np.where(scale > 0, scale, 1.0), res)
    return float(res) if np.ndim(res) == 0 else res


# ------------------------------------------------------------- singularities

@dataclass(frozen=True)
class SingularPoint:
    k: int
    b: complex
    m: int
    gradient_norm: float  # |P'(b)|, zero up to quadrature error

    @property
    def type(self) -> str:
        return f"A{self.m - 1}"

    @property
    def chain(self) -> tuple:
        return tuple(f"E_{self.k}_{l}" for l in range(1, self.m))

    @property
    def adjacency(self) -> tuple:
        c = self.chain
        return tuple((c[i], c[i + 1]) for i in range(len(c) - 1))

    def to_dict(self):
        return {
            "k": self.k,
            "point": [[0.0, 0.0], [0.0, 0.0], [float(self.b.real), float(self.b.imag)]],
            "b": [float(self.b.real), float(self.b.imag)],
            "m": self.m,
            "type": self.type,
            "chain": list(self.chain),
            "adjacency": [list(e) for e in self.adjacency],
            "self_intersection": -2,
            "gradient_norm": self.gradient_norm,
        }


@dataclass(frozen=True)
class SingularityReport:
    singular: tuple
    atlas: ChartAtlas = field(repr=False)

    @property
    def smooth(self) -> bool:
        return not self.singular

    def to_dict(self):
        return {"singular": [s.to_dict() for s in self.singular], "atlas": self.atlas.to_dict()}


def singular_points(P: EntireProduct, atlas: ChartAtlas | None = None) -> SingularityReport:
    """Points (0, 0, b_k) with m_k >= 2 and their exceptional A-chains.

    grad(u1 u2 - P(u3)) = (u2, u1, -P'(u3)) vanishes on the surface exactly
    at u1 = u2 = 0 over a multiple zero of P; the self-intersection -2 is
    bookkeeping, not a computation.
    """
    atlas = build_atlas(P) if atlas is None else atlas
    out = []
    for k, (b, m) in enumerate(zip(atlas.zero_points, atlas.zero_orders)):
        if m >= 2:
            grad = abs(product_derivative(P, complex(b)))
            out.append(SingularPoint(k, complex(b), int(m), float(grad)))
    return SingularityReport(tuple(out), atlas)


# ---------------------------------------------------- two-center blow-up model

def chen_chen_chi0(chart: str, u, v):
    """Explicit map of the three two-center charts into Bl_0(S), S: u1 u2 = u3^2.

    Returns ((u1, u2, u3), (U1, U2, U3)).
    """
    u = complex(u)
    v = complex(v)
    if v == 0:
        raise ZeroFibreError("fibre coordinate must be nonzero")
    if chart == "M1":
        w = u / v
        return (u * u / v, v, u), (w * w, 1.0 + 0j, w)
    if chart == "M2":
        return (u / v, u * v, u), (1.0 / v, v, 1.0 + 0j)
    if chart == "M3":
        w = u * v
        return (1.0 / v, u * u * v, u), (1.0 + 0j, w * w, w)
    raise KeyError(f"unknown chart {chart!r}")


def chen_chen_theta0(point, proj):
    """Inverse of chen_chen_chi0 on each patch where it is defined: {chart: (u, v)}."""
    u1, u2, u3 = point
    U1, U2, U3 = proj
    out = {}
    if u2 != 0:
        out["M1"] = (u3, u2)
    if U3 != 0:
        out["M2"] = (u3, U2 / U3)
    if u1 != 0:
        out["M3"] = (u3, 1.0 / u1)
    return out


# (u, v)_M1 ~ (u, v/u)_M2 ~ (u, v/u^2)_M3
_CC_POWER = {"M1": 0, "M2": 1, "M3": 2}


def _cc_convert(src, dst, u, v):
    return v * u ** (_CC_POWER[src] - _CC_POWER[dst])


def _proj_distance(a, b) -> float:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    # sine of the angle via |a ^ b|; avoids the cancellation in 1 - |<a, b>|^2
    w = [a[i] * b[j] - a[j] * b[i] for i, j in ((0, 1), (0, 2), (1, 2))]
    return float(np.sqrt(sum(abs(c) ** 2 for c in w)))


def blowup_equations(point, proj) -> np.ndarray:
    """Scaled residuals of the five defining equations of Bl_0(S)."""
    u = np.asarray(point, dtype=complex)
    U = np.asarray(proj, dtype=complex)
    U = U / np.max(np.abs(U))
    s = max(1.0, float(np.max(np.abs(u))))
    res = [abs(u[j] * U[k] - u[k] * U[j]) / s for j, k in ((0, 1), (0, 2), (1, 2))]
    res.append(abs(U[0] * U[1] - U[2] ** 2))
    res.append(abs(u[0] * u[1] - u[2] ** 2) / s**2)
    return np.array(res)


def _grid(n: int):
    k = np.arange(n)
    us = (0.15 + 0.1 * k) * np.exp(0.9j * k)
    vs = 0.2 * 1.25**k * np.exp(1j * (0.4 + 1.1 * k))
    return us, vs


@dataclass(frozen=True)
class BlowupReport:
    equation_residual: float
    overlap_residual: float
    roundtrip_residual: float
    limits: dict
    failures: tuple
    samples: int

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self):
        return {
            "passed": self.passed,
            "equation_residual": self.equation_residual,
            "overlap_residual": self.overlap_residual,
            "roundtrip_residual": self.roundtrip_residual,
            "limits": self.limits,
            "failures": list(self.failures),
            "samples": self.samples,
        }


def blowup_fixture_check(n: int = 20, tol: float = 1e-10, roundtrip_tol: float = 1e-12) -> BlowupReport:
    """Check the two-center chart maps against Bl_0(S) on an n x n grid per chart.

    Checks membership (five equations), agreement of the three charts on
    overlaps, the round trip through the inverse patches, and the two limit
    points of the M1 fibre.
    """
    us, vs = _grid(n)
    eq = ov = rt = 0.0
    count = 0
    for chart in ("M1", "M2", "M3"):
        for u in us:
            for v in vs:
                point, proj = chen_chen_chi0(chart, u, v)
                eq = max(eq, float(blowup_equations(point, proj).max()))
                for other in ("M1", "M2", "M3"):
                    p2, q2 = chen_chen_chi0(other, u, _cc_convert(chart, other, u, v))
                    scale = max(1.0, max(abs(c) for c in point))
                    ov = max(ov, max(abs(a - b) for a, b in zip(point, p2)) / scale, _proj_distance(proj, q2))
                for patch, (u_back, v_back) in chen_chen_theta0(point, proj).items():
                    v_expect = _cc_convert(chart, patch, u, v)
                    err = max(abs(u_back - u) / max(1.0, abs(u)), abs(v_back - v_expect) / abs(v_expect))
                    rt = max(rt, err)
                count += 1
    limits = {
        "M1_v_to_0": _proj_distance(chen_chen_chi0("M1", 1.0, 1e-8)[1], (1, 0, 0)),
        "M1_v_to_inf": _proj_distance(chen_chen_chi0("M1", 1.0, 1e8)[1], (0, 1, 0)),
    }
    failures = []
    if not eq <= tol:
        failures.append(f"Bl_0(S) equations violated: {eq:.3e}")
    if not ov <= tol:
        failures.append(f"charts disagree on overlaps: {ov:.3e}")
    if not rt <= roundtrip_tol:
        failures.append(f"inverse round trip off by {rt:.3e}")
    for name, d in limits.items():
        if not d <= 1e-6:
            failures.append(f"limit {name} misses by {d:.3e}")
    return BlowupReport(eq, ov, rt, limits, tuple(failures), count)
