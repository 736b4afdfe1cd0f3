"""Monopole connection, Gibbons-Hawking metric and the hyperkähler triple.

Conventions
-----------
Pointwise tensors are written in the coframe ``(omega, dx, dy, dz)`` with
``omega = dt + theta``. ``complex_structure`` returns the action of J on
covectors, so the column of ``dx`` in J_x is ``omega / V``. On tangent vectors
J acts by the transpose; the Kähler forms then satisfy the matrix identity
``Omega = g @ J.T``, i.e. ``Omega(X, Y) = g(X, J Y)``.

Orientation is the standard one, ``*(dx^dy) = dz``, and the connection obeys
``d theta = CURL_SIGN * (*dV)``, i.e. ``curl theta = CURL_SIGN * grad V``.
With ``CURL_SIGN = +1`` the curvature integrates to ``e_j = -1`` over a small
sphere around a unit-weight center.
"""
from __future__ import annotations

import numpy as np

from .config import PunctureConfig
from .errors import NonUnitVectorError, PunctureEvaluationError, StepTooLargeError, StringProximityError
from .potential import _check_clearance, eval_potential, grad_potential, kernel_constant

CURL_SIGN = 1.0
DEFAULT_GAUGE_AXIS = (0.0, 0.0, -1.0)
STRING_TOL = 1e-8

OMEGA, DX, DY, DZ = range(4)


# --------------------------------------------------------------- connection

def _unit(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if abs(n - 1.0) > 1e-12:
        raise NonUnitVectorError(f"expected a unit vector, |v| = {n!r}")
    return v


def string_distance(config: PunctureConfig, x, gauge_axis=DEFAULT_GAUGE_AXIS):
    """Distance from each x to each string ray {p_j + t n : t >= 0}, shape (..., n)."""
    n = _unit(gauge_axis)
    d = np.asarray(x, dtype=float)[..., None, :] - config.points
    along = d @ n
    perp = np.linalg.norm(np.cross(d, n), axis=-1)
    return np.where(along > 0, perp, np.linalg.norm(d, axis=-1))


def _check_strings(config, x, gauge_axis, clearance):
    sd = np.atleast_2d(string_distance(config, x, gauge_axis))
    bad = sd < clearance
    if np.any(bad):
        row = int(np.argmax(np.any(bad, axis=1)))
        j = int(np.argmin(sd[row]))
        raise StringProximityError(j, float(sd[row, j]))


def monopole_theta(config: PunctureConfig, x, gauge_axis=DEFAULT_GAUGE_AXIS,
                   normalization: str = "quarter_pi", check: bool = True):
    """Superposed Dirac-monopole potentials with strings along ``gauge_axis``.

    Each term is ``q (r x n) / (|r| (|r| - n.r))`` with ``r = x - p_j``; its
    curl is ``q r / |r|^3``, and ``q = -CURL_SIGN c |e_j|`` makes the total
    curl equal ``CURL_SIGN * grad V``.
    """
    n = _unit(gauge_axis)
    x = np.asarray(x, dtype=float)
    d = x[..., None, :] - config.points
    r = np.linalg.norm(d, axis=-1)
    if r.size and np.any(r == 0):
        flat = r.reshape(-1, r.shape[-1])
        raise PunctureEvaluationError(int(np.argmin(flat.min(axis=0))), 0.0)
    if check:
        _check_strings(config, x, n, STRING_TOL)
    q = -CURL_SIGN * kernel_constant(normalization) * np.abs(config.weights)
    denom = r * (r - d @ n)
    terms = np.cross(d, n) * (q / denom)[..., None]
    return terms.sum(axis=-2)


def fd_curl(field, x, h):
    """Central-difference curl of a vector field at x (shape (3,) or (m, 3))."""
    x = np.asarray(x, dtype=float)
    jac = np.empty(x.shape[:-1] + (3, 3))  # jac[..., i, k] = d F_i / d x_k
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        jac[..., :, k] = (field(x + e) - field(x - e)) / (2.0 * h)
    return np.stack(
        [jac[..., 2, 1] - jac[..., 1, 2], jac[..., 0, 2] - jac[..., 2, 0], jac[..., 1, 0] - jac[..., 0, 1]],
        axis=-1,
    )


def curvature_residual(config: PunctureConfig, x, h: float = 1e-3, gauge_axis=DEFAULT_GAUGE_AXIS,
                       normalization: str = "quarter_pi"):
    """Max-norm of FD curl(theta) - CURL_SIGN grad V; O(h^2).

    Needs clearance > 10h from every center and every string.
    """
    if not h > 0:
        raise StepTooLargeError("h must be positive")
    _check_clearance(config, x, h)
    _check_strings(config, x, gauge_axis, max(STRING_TOL, 10.0 * h))
    curl = fd_curl(lambda y: monopole_theta(config, y, gauge_axis, normalization, check=False), x, h)
    diff = curl - CURL_SIGN * grad_potential(config, x, normalization)
    return np.max(np.abs(diff), axis=-1)


def chern_number(config: PunctureConfig, index: int, radius: float | None = None,
                 n_theta: int = 64, n_phi: int = 128) -> float:
    """Flux of the curvature CURL_SIGN * grad V through a small sphere about center ``index``.

    Uses the quarter_pi normalization, so a center of weight e_j gives e_j.
    Quadrature: Gauss-Legendre in cos(polar angle), trapezoid in azimuth.
    """
    p = config.points[index]
    if radius is None:
        others = np.delete(config.points, index, axis=0)
        gap = np.min(np.linalg.norm(others - p, axis=1)) if len(others) else 1.0
        radius = 0.25 * gap
    mu, wmu = np.polynomial.legendre.leggauss(n_theta)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    s = np.sqrt(1.0 - mu**2)
    nrm = np.stack(
        [s[:, None] * np.cos(phi)[None, :], s[:, None] * np.sin(phi)[None, :], np.broadcast_to(mu[:, None], (n_theta, n_phi))],
        axis=-1,
    )
    pts = p + radius * nrm
    flux_density = CURL_SIGN * np.sum(grad_potential(config, pts) * nrm, axis=-1)
    flux = radius**2 * (2.0 * np.pi / n_phi) * np.sum(wmu[:, None] * flux_density)
    return float(flux)


# ------------------------------------------------------------ pointwise tensors

def metric_matrix(config: PunctureConfig, x, normalization: str = "quarter_pi") -> np.ndarray:
    """g = V^-1 omega^2 + V (dx^2 + dy^2 + dz^2) as diag(1/V, V, V, V)."""
    V = float(eval_potential(config, x, normalization))
    return np.diag([1.0 / V, V, V, V])


# (a, b, c) such that J_a: d a -> omega/V, d b -> d c
_CYCLIC = {"x": (DX, DY, DZ), "y": (DY, DZ, DX), "z": (DZ, DX, DY)}


def _basic_structure(axis: str, V: float) -> np.ndarray:
    a, b, c = _CYCLIC[axis]
    J = np.zeros((4, 4))
    J[OMEGA, a] = 1.0 / V
    J[a, OMEGA] = -V
    J[c, b] = 1.0
    J[b, c] = -1.0
    return J


def structure_from_V(axis, V: float) -> np.ndarray:
    """J_axis (covector action) for a given potential value."""
    if isinstance(axis, str):
        return _basic_structure(axis, V)
    v = _unit(axis)
    return sum(vi * _basic_structure(a, V) for vi, a in zip(v, "xyz"))


def complex_structure(axis, config: PunctureConfig, x, normalization: str = "quarter_pi") -> np.ndarray:
    """J_x, J_y, J_z, or J_v = v1 J_x + v2 J_y + v3 J_z for a unit vector v."""
    return structure_from_V(axis, float(eval_potential(config, x, normalization)))


def kahler_form_from_V(axis, V: float) -> np.ndarray:
    if not isinstance(axis, str):
        v = _unit(axis)
        return sum(vi * kahler_form_from_V(a, V) for vi, a in zip(v, "xyz"))
    a, b, c = _CYCLIC[axis]
    W = np.zeros((4, 4))
    W[a, OMEGA], W[OMEGA, a] = 1.0, -1.0  # d a ^ omega
    W[b, c], W[c, b] = V, -V  # V d b ^ d c
    return W


def kahler_form(axis, config: PunctureConfig, x, normalization: str = "quarter_pi") -> np.ndarray:
    """Omega_axis as an antisymmetric matrix on the dual frame."""
    return kahler_form_from_V(axis, float(eval_potential(config, x, normalization)))


def quaternion_residual(V: float) -> float:
    """Largest entrywise violation of J_a^2 = -1 and J_x J_y = J_z = -J_y J_x."""
    Jx, Jy, Jz = (structure_from_V(a, V) for a in "xyz")
    I = np.eye(4)
    res = [
        np.abs(Jx @ Jx + I).max(),
        np.abs(Jy @ Jy + I).max(),
        np.abs(Jz @ Jz + I).max(),
        np.abs(Jx @ Jy - Jz).max(),
        np.abs(Jy @ Jx + Jz).max(),
        np.abs(Jy @ Jz - Jx).max(),
        np.abs(Jz @ Jx - Jy).max(),
    ]
    return float(max(res))


def compatibility_residual(V: float, rng=None, pairs: int = 100) -> float:
    """Relative violation of g(JX, JY) = g(X, Y) and Omega = g J^T over random vectors."""
    rng = np.random.default_rng(0) if rng is None else rng
    g = np.diag([1.0 / V, V, V, V])
    worst = 0.0
    for a in "xyz":
        Jv = structure_from_V(a, V).T  # action on tangent vectors
        W = kahler_form_from_V(a, V)
        worst = max(worst, np.abs(W - g @ Jv).max() / max(1.0, np.abs(W).max()))
        X = rng.standard_normal((pairs, 4))
        Y = rng.standard_normal((pairs, 4))
        lhs = np.einsum("pi,ij,pj->p", X @ Jv.T, g, Y @ Jv.T)
        rhs = np.einsum("pi,ij,pj->p", X, g, Y)
        scale = np.einsum("pi,ij,pj->p", np.abs(X), g, np.abs(Y))
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / scale)))
    return worst


# ------------------------------------------------------------------ sampling

def sample_points(config: PunctureConfig, count: int, seed: int = 0, clearance: float = 1.0,
                  gauge_axis=DEFAULT_GAUGE_AXIS, radius: float | None = None) -> np.ndarray:
    """Uniform points in a ball about the origin, at least ``clearance`` from
    every center and every Dirac string.

    The default ball radius is 2 plus the largest center radius not exceeding 16.
    """
    if radius is None:
        rad = config.radii
        core = rad[rad <= 16.0]
        radius = (core.max() if core.size else 1.0) + 2.0 + clearance
    rng = np.random.default_rng(seed)
    out = []
    need = count
    for _ in range(1000):
        if need <= 0:
            break
        m = max(4 * need, 64)
        g = rng.standard_normal((m, 3))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        pts = g * (radius * rng.random(m) ** (1.0 / 3.0))[:, None]
        r = np.linalg.norm(pts[:, None, :] - config.points, axis=-1).min(axis=1)
        sd = string_distance(config, pts, gauge_axis).min(axis=1)
        keep = pts[(r >= clearance) & (sd >= clearance)]
        out.append(keep[:need])
        need -= len(keep[:need])
    if need > 0:
        raise RuntimeError("could not place sample points with the requested clearance")
    return np.concatenate(out)
