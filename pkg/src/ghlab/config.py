"""Puncture configurations: centers p_j in R^3 with integer Chern weights.

A finite array of centers stands in for the countable set; the optional
``TailModel`` records how the sequence continues beyond the truncation so
that summability verdicts refer to the infinite object.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import IO, Optional, Union

import numpy as np

from .errors import (
    DuplicatePunctureError,
    InvalidParameterError,
    LengthMismatchError,
    ParseError,
)

TAIL_KINDS = ("none", "geometric", "powerlaw", "custom")
# JSON key carrying the numeric parameter of each tail kind
_TAIL_PARAM = {"geometric": "ratio", "powerlaw": "exponent", "custom": "value"}

NEAR_DUPLICATE_WARNING = 1e-9


@dataclass(frozen=True)
class TailModel:
    """Analytic continuation of the puncture sequence past the truncation.

    ``anchor`` is the 1-based index of the puncture the model is calibrated
    on (``None`` means the last one). ``geometric`` assumes
    ``|p_{j+1}| = ratio * |p_j|``; ``powerlaw`` assumes ``|p_j|`` grows like
    ``j**exponent``; ``custom`` carries a caller-supplied bound on
    ``sum_{j>N} |e_j|/|p_j|``.
    """

    kind: str = "none"
    param: float = 0.0
    anchor: Optional[int] = None

    def __post_init__(self):
        if self.kind not in TAIL_KINDS:
            raise InvalidParameterError(f"unknown tail kind {self.kind!r}")
        if self.kind == "geometric" and not self.param > 1:
            raise InvalidParameterError("geometric tail needs ratio > 1")
        if self.kind == "custom" and not self.param >= 0:
            raise InvalidParameterError("custom tail bound must be >= 0")
        if self.kind == "powerlaw" and not np.isfinite(self.param):
            raise InvalidParameterError("powerlaw exponent must be finite")
        if self.anchor is not None and self.anchor < 1:
            raise InvalidParameterError("tail anchor is a 1-based index")


@dataclass(frozen=True, eq=False)
class PunctureConfig:
    points: np.ndarray
    weights: np.ndarray
    tail: Optional[TailModel] = None
    label: str = ""
    min_separation: float = field(default=NEAR_DUPLICATE_WARNING, repr=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1 and pts.size == 0:
            pts = pts.reshape(0, 3)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ParseError(f"punctures must be a list of [x, y, z] triples, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ParseError("puncture coordinates must be finite")
        w = np.asarray(self.weights)
        if w.ndim != 1 or len(w) != len(pts):
            raise LengthMismatchError(f"{len(pts)} punctures but {w.size} weights")
        if w.size and not np.all(np.equal(np.mod(w, 1), 0)):
            raise ParseError("weights must be integers")
        w = w.astype(np.int64)
        _check_distinct(pts, self.min_separation)
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, PunctureConfig):
            return NotImplemented
        return (
            np.array_equal(self.points, other.points)
            and np.array_equal(self.weights, other.weights)
            and self.tail == other.tail
            and self.label == other.label
        )

    __hash__ = None

    @property
    def radii(self) -> np.ndarray:
        return np.linalg.norm(self.points, axis=1)

    @property
    def diameter(self) -> float:
        if len(self) < 2:
            return 0.0
        lo, hi = self.points.min(axis=0), self.points.max(axis=0)
        return float(np.linalg.norm(hi - lo))


def _check_distinct(pts, min_separation):
    n = len(pts)
    if n < 2:
        return
    order = np.lexsort(pts.T[::-1])
    srt = pts[order]
    same = np.all(srt[1:] == srt[:-1], axis=1)
    if np.any(same):
        k = int(np.argmax(same))
        i, j = sorted((int(order[k]), int(order[k + 1])))
        raise DuplicatePunctureError(i, j)
    if min_separation > 0 and n <= 4096:
        d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
        d[np.diag_indices(n)] = np.inf
        if d.min() < min_separation:
            i, j = np.unravel_index(np.argmin(d), d.shape)
            warnings.warn(
                f"punctures {min(i, j)} and {max(i, j)} are only {d.min():.2e} apart",
                RuntimeWarning,
                stacklevel=3,
            )


# ---------------------------------------------------------------- JSON I/O

def _tail_from_json(obj) -> Optional[TailModel]:
    if obj is None:
        return None
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ParseError("tail must be an object with a 'kind' field")
    kind = obj["kind"]
    if kind not in TAIL_KINDS:
        raise ParseError(f"unknown tail kind {kind!r}")
    param = 0.0
    if kind in _TAIL_PARAM:
        key = _TAIL_PARAM[kind]
        if key not in obj:
            raise ParseError(f"tail kind {kind!r} needs field {key!r}")
        param = float(obj[key])
    anchor = obj.get("anchor")
    return TailModel(kind, param, None if anchor is None else int(anchor))


def config_from_dict(doc: dict) -> PunctureConfig:
    if not isinstance(doc, dict) or "punctures" not in doc:
        raise ParseError("document must be an object with a 'punctures' list")
    pts = doc["punctures"]
    if not isinstance(pts, list) or any(not isinstance(p, list) or len(p) != 3 for p in pts):
        raise ParseError("punctures must be a list of [x, y, z] triples")
    try:
        pts = np.array(pts, dtype=float).reshape(-1, 3)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad puncture coordinate: {exc}") from None
    weights = doc.get("weights")
    if weights is None:
        # smooth completion convention
        weights = [-1] * len(pts)
    if not isinstance(weights, list) or any(isinstance(w, bool) or not isinstance(w, (int, float)) for w in weights):
        raise ParseError("weights must be a list of integers")
    return PunctureConfig(
        points=pts,
        weights=np.array(weights),
        tail=_tail_from_json(doc.get("tail")),
        label=str(doc.get("label", "")),
    )


def load_config(source: Union[str, bytes, IO], format: str = "json") -> PunctureConfig:
    """Parse and validate a configuration document.

    ``source`` may be text, bytes, or a readable (text or binary) stream.
    """
    if format != "json":
        raise ParseError(f"unsupported format {format!r}")
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise ParseError(str(exc)) from None
    return config_from_dict(doc)


def config_to_dict(config: PunctureConfig) -> dict:
    doc = {
        "label": config.label,
        "punctures": [[float(c) for c in p] for p in config.points],
        "weights": [int(w) for w in config.weights],
    }
    t = config.tail
    if t is not None:
        tail = {"kind": t.kind}
        if t.kind in _TAIL_PARAM:
            tail[_TAIL_PARAM[t.kind]] = t.param
        if t.anchor is not None:
            tail["anchor"] = t.anchor
        doc["tail"] = tail
    return doc


def dump_config(config: PunctureConfig) -> str:
    # repr-precision floats make the text round trip exact
    return json.dumps(config_to_dict(config), indent=2) + "\n"


# ---------------------------------------------------------------- generators

def generate_config(kind: str, *, ratio: float = 2.0, count: int = 1, spacing: float = 1.0,
                    radius: float = 1.0, seed: int = 0) -> PunctureConfig:
    """Deterministic fixture families.

    ``geometric_z``: p_j = (0, 0, ratio**j), j = 1..count, with a geometric tail.
    ``collinear_x``: p_j = ((j-1) * spacing, 0, 0), j = 1..count.
    ``random_ball``: ``count`` points uniform in the ball of ``radius``.
    All weights are -1.
    """
    if count < 1:
        raise InvalidParameterError("count must be >= 1")
    if kind == "geometric_z":
        if not ratio > 1:
            raise InvalidParameterError("ratio must be > 1")
        z = float(ratio) ** np.arange(1, count + 1, dtype=float)
        pts = np.column_stack([np.zeros(count), np.zeros(count), z])
        tail = TailModel("geometric", float(ratio))
        label = f"geometric_z(ratio={ratio}, count={count})"
    elif kind == "collinear_x":
        if not spacing > 0:
            raise InvalidParameterError("spacing must be > 0")
        x = spacing * np.arange(count, dtype=float)
        pts = np.column_stack([x, np.zeros(count), np.zeros(count)])
        tail = None
        label = f"collinear_x(spacing={spacing}, count={count})"
    elif kind == "random_ball":
        if not radius > 0:
            raise InvalidParameterError("radius must be > 0")
        rng = np.random.default_rng(seed)
        g = rng.standard_normal((count, 3))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = radius * rng.random(count) ** (1.0 / 3.0)
        pts = g * r[:, None]
        tail = None
        label = f"random_ball(radius={radius}, count={count}, seed={seed})"
    else:
        raise InvalidParameterError(f"unknown generator {kind!r}")
    return PunctureConfig(pts, -np.ones(count, dtype=np.int64), tail, label)


def chen_chen() -> PunctureConfig:
    """Two centers (0,0,0) and (1,0,0): the A_1 model along the x direction."""
    return generate_config("collinear_x", spacing=1.0, count=2)
