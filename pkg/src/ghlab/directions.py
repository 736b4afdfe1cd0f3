"""Projections of the centers along a direction v, and the measure estimates
showing that almost every direction is generic.

``v^perp`` is identified with C through a deterministic orthonormal frame
(``make_frame``); any other identification differs by a rotation, which
multiplies every projected point by a common phase.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .config import PunctureConfig
from .errors import InvalidParameterError, OriginPunctureError, ZeroVectorError

FRAME_RULE = "least-aligned-axis/gram-schmidt/v1"
MC_CHUNK = 1 << 16


@dataclass(frozen=True, eq=False)
class DirectionFrame:
    v: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    derivation: str = FRAME_RULE

    def rotated(self, phi: float) -> "DirectionFrame":
        """Frame whose complex coordinate is e^{i phi} times this one's."""
        c, s = np.cos(phi), np.sin(phi)
        return DirectionFrame(self.v, c * self.f1 - s * self.f2, s * self.f1 + c * self.f2,
                              f"{self.derivation}+rot({phi!r})")

    def to_complex(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return pts @ self.f1 + 1j * (pts @ self.f2)


def make_frame(v) -> DirectionFrame:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if not n > 0:
        raise ZeroVectorError("direction must be nonzero")
    v = v / n
    k = int(np.argmin(np.abs(v)))  # first index wins ties
    e = np.zeros(3)
    e[k] = 1.0
    f1 = e - (e @ v) * v
    f1 /= np.linalg.norm(f1)
    f2 = np.cross(v, f1)
    return DirectionFrame(v, f1, f2)


# ---------------------------------------------------------------- clustering

class DisjointSet:
    def __init__(self, n):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, i):
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return
        if self.rank[ri] < self.rank[rj]:
            ri, rj = rj, ri
        self.parent[rj] = ri
        if self.rank[ri] == self.rank[rj]:
            self.rank[ri] += 1


def _close_pairs(z: np.ndarray, eps: float):
    n = len(z)
    if n < 2:
        return []
    if n <= 256:
        d = np.abs(z[:, None] - z[None, :])
        i, j = np.nonzero(np.triu(d < eps, k=1))
        return list(zip(i.tolist(), j.tolist()))
    xy = np.column_stack([z.real, z.imag])
    pairs = cKDTree(xy).query_pairs(eps, output_type="ndarray")
    keep = np.abs(z[pairs[:, 0]] - z[pairs[:, 1]]) < eps
    return [tuple(p) for p in pairs[keep].tolist()]


@dataclass(frozen=True)
class Cluster:
    b: complex
    members: tuple  # puncture indices ordered by their coordinate along v
    m: int


@dataclass(frozen=True, eq=False)
class ProjectionReport:
    a: np.ndarray
    clusters: tuple
    m0: int
    generic: bool
    accumulation_flag: bool
    tolerance: float
    frame: DirectionFrame = field(repr=False)

    @property
    def nonzero_clusters(self):
        return tuple(c for c in self.clusters if c.b != 0)

    def to_dict(self):
        return {
            "v": self.frame.v.tolist(),
            "frame_id": self.frame.derivation,
            "clusters": [
                {"b": [float(c.b.real), float(c.b.imag)], "m": c.m, "members": list(c.members)}
                for c in self.clusters
            ],
            "m0": self.m0,
            "generic": self.generic,
            "accumulation_flag": self.accumulation_flag,
            "tolerance": self.tolerance,
        }


def default_tolerance(config: PunctureConfig) -> float:
    return 1e-9 * (config.diameter or 1.0)


def _accumulation_heuristic(config: PunctureConfig, a: np.ndarray, outer_fraction: float = 0.5) -> bool:
    """Truncation evidence that projections accumulate.

    Only meaningful when the configuration declares an infinite tail. Orders
    centers by |p|; flags when at least ``outer_fraction`` of the outer half
    projects back into the disk already occupied by the inner half, i.e. the
    count of projections inside a fixed radius keeps growing with |p|.
    """
    if config.tail is None or len(a) < 4:
        return False
    order = np.argsort(config.radii, kind="stable")
    half = len(order) // 2
    inner, outer = order[:half], order[half:]
    R = np.max(np.abs(a[inner]))
    inside = np.count_nonzero(np.abs(a[outer]) <= R)
    return bool(inside > 0 and inside >= outer_fraction * len(outer))


def project(config: PunctureConfig, frame: DirectionFrame, tol: float | None = None) -> ProjectionReport:
    """Project the centers to v^perp = C and group coincident images.

    Clusters are the connected components of the graph joining projections
    closer than ``tol``; the origin takes part as an extra node so the
    cluster at 0 has b = 0 exactly.
    """
    eps = default_tolerance(config) if tol is None else float(tol)
    a = frame.to_complex(config.points)
    n = len(a)
    ds = DisjointSet(n + 1)
    for i, j in _close_pairs(a, eps):
        ds.union(i, j)
    for j in np.flatnonzero(np.abs(a) < eps):
        ds.union(int(j), n)
    origin_root = ds.find(n)
    groups = {}
    for j in range(n):
        groups.setdefault(ds.find(j), []).append(j)
    height = config.points @ frame.v
    clusters = []
    m0 = 0
    for root, members in sorted(groups.items(), key=lambda kv: kv[1][0]):
        members = sorted(members, key=lambda j: (height[j], j))
        if root == origin_root:
            b = 0j
            m0 = len(members)
        else:
            b = complex(np.mean(a[members]))
        clusters.append(Cluster(b, tuple(members), len(members)))
    generic = all(c.m == 1 for c in clusters)
    return ProjectionReport(a, tuple(clusters), m0, generic, _accumulation_heuristic(config, a), eps, frame)


def bad_set_membership(config: PunctureConfig, v, tol: float = 1e-12):
    """Pairs (i, j), i < j, whose difference p_i - p_j is parallel to v within tol."""
    v = np.asarray(v, dtype=float)
    nv = np.linalg.norm(v)
    if not nv > 0:
        raise ZeroVectorError("direction must be nonzero")
    v = v / nv
    p = config.points
    i, j = np.triu_indices(len(p), k=1)
    d = p[i] - p[j]
    sine = np.linalg.norm(np.cross(d, v), axis=1) / np.linalg.norm(d, axis=1)
    hit = sine < tol
    return [(int(a), int(b)) for a, b in zip(i[hit], j[hit])]


# ------------------------------------------------------------ measure estimates

def uniform_sphere(rng, count: int) -> np.ndarray:
    g = rng.standard_normal((count, 3))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _chunk_rng(seed: int, chunk: int):
    # counter-based substreams: chunk k always sees the same stream
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))


@dataclass(frozen=True, eq=False)
class CapEstimate:
    n: float
    exact_measures: np.ndarray  # m(A_{j,n}) = 2 pi (1 - cos(n/|p_j|)), capped at 4 pi
    bound_terms: np.ndarray  # pi (n/|p_j|)^2
    bound: float
    mc_union_estimate: float
    mc_stddev: float
    samples: int
    seed: int
    # companion family {v : sin angle(v, v_j) <= n/|p_j|}
    sin_exact_measures: np.ndarray = field(repr=False, default=None)
    sin_mc_union_estimate: float = 0.0
    sin_mc_stddev: float = 0.0

    @property
    def exact_sum(self) -> float:
        return float(np.sum(self.exact_measures))

    def to_dict(self):
        return {
            "n": self.n,
            "bound": self.bound,
            "exact_sum": self.exact_sum,
            "mc": self.mc_union_estimate,
            "sigma": self.mc_stddev,
            "samples": self.samples,
            "seed": self.seed,
            "sin_exact_sum": float(np.sum(self.sin_exact_measures)),
            "sin_mc": self.sin_mc_union_estimate,
            "sin_sigma": self.sin_mc_stddev,
        }


def cap_angles(config: PunctureConfig, n: float) -> np.ndarray:
    r = config.radii
    if np.any(r == 0):
        raise OriginPunctureError("cap estimate needs every center away from the origin")
    return n / r


def exact_cap_measure(s):
    s = np.asarray(s, dtype=float)
    return np.where(s >= np.pi, 4.0 * np.pi, 2.0 * np.pi * (1.0 - np.cos(np.minimum(s, np.pi))))


def exact_sin_cap_measure(s):
    """Measure of {v : sin angle(v, v_j) <= s}: two antipodal caps of angle arcsin s."""
    s = np.asarray(s, dtype=float)
    sc = np.minimum(s, 1.0)
    return np.where(s >= 1.0, 4.0 * np.pi, 4.0 * np.pi * (1.0 - np.sqrt(1.0 - sc**2)))


def _count_chunk(units, cos_theta, cos_sin, seed, chunk, size):
    v = uniform_sphere(_chunk_rng(seed, chunk), size)
    dots = v @ units.T
    hit_theta = np.any(dots >= cos_theta, axis=1)
    hit_sin = np.any(np.abs(dots) >= cos_sin, axis=1)
    return int(hit_theta.sum()), int(hit_sin.sum())


def cap_estimate(config: PunctureConfig, n: float, samples: int = 100_000, seed: int = 0,
                 workers: int = 1) -> CapEstimate:
    """Exact cap measures, their quadratic bound, and a Monte Carlo estimate of the union.

    The estimate is identical for any ``workers`` because sample chunk k is
    drawn from substream k of ``seed``.
    """
    if samples < 1:
        raise InvalidParameterError("samples must be >= 1")
    if n < 0:
        raise InvalidParameterError("n must be >= 0")
    s = cap_angles(config, n)
    exact = exact_cap_measure(s)
    terms = np.pi * s**2
    units = config.points / config.radii[:, None]
    # s >= pi: whole sphere; cos(pi) = -1 already admits everything
    cos_theta = np.cos(np.minimum(s, np.pi))
    cos_sin = np.where(s >= 1.0, -1.0, np.sqrt(1.0 - np.minimum(s, 1.0) ** 2))
    if n == 0:
        # empty caps: a single direction still satisfies dot >= 1 with probability 0
        cos_theta = np.full_like(s, np.inf)
        cos_sin = np.full_like(s, np.inf)
    sizes = [MC_CHUNK] * (samples // MC_CHUNK)
    if samples % MC_CHUNK:
        sizes.append(samples % MC_CHUNK)
    jobs = [(units, cos_theta, cos_sin, seed, k, size) for k, size in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            counts = list(pool.map(lambda j: _count_chunk(*j), jobs))
    else:
        counts = [_count_chunk(*j) for j in jobs]
    hits = np.sum(counts, axis=0)
    p_theta, p_sin = hits / samples
    area = 4.0 * np.pi
    return CapEstimate(
        n=n,
        exact_measures=exact,
        bound_terms=terms,
        bound=float(terms.sum()),
        mc_union_estimate=area * p_theta,
        mc_stddev=area * np.sqrt(p_theta * (1 - p_theta) / samples),
        samples=samples,
        seed=seed,
        sin_exact_measures=exact_sin_cap_measure(s),
        sin_mc_union_estimate=area * p_sin,
        sin_mc_stddev=area * np.sqrt(p_sin * (1 - p_sin) / samples),
    )


@dataclass(frozen=True)
class SurveySummary:
    fraction_generic: float
    fraction_accumulating_heuristic: float
    num_directions: int
    seed: int

    def to_dict(self):
        return dict(self.__dict__)


def genericity_survey(config: PunctureConfig, num_directions: int, seed: int = 0,
                      tol: float | None = None) -> SurveySummary:
    if num_directions < 1:
        raise InvalidParameterError("num_directions must be >= 1")
    dirs = uniform_sphere(np.random.default_rng(seed), num_directions)
    generic = accumulating = 0
    for v in dirs:
        rep = project(config, make_frame(v), tol)
        generic += rep.generic
        accumulating += rep.accumulation_flag
    return SurveySummary(generic / num_directions, accumulating / num_directions, num_directions, seed)
