"""Lipschitz maps between metric spaces, sampled constants and diameters.

Constants are only ever estimated from below: the largest ratio
``rho(f(x), f(y)) / d(x, y)`` seen over a sample of pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Optional, Tuple

import numpy as np

from ._backend import kernels
from .metric import Metric, MetricError, Plane, as_vector

RATIO_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class LipschitzMap:
    """``rule`` from ``source`` to ``target``, with an optional claimed constant.

    ``rule`` maps one point to one point unless ``vectorized`` is set, in
    which case it maps an ``(m, source.dim)`` stack to ``(m, target.dim)``.
    """

    rule: Callable
    source: Metric
    target: Metric
    claimed_C: Optional[float] = None
    vectorized: bool = False
    name: str = "map"

    def __post_init__(self):
        if self.claimed_C is not None and not self.claimed_C >= 0:
            raise ValueError(f"claimed constant must be >= 0, got {self.claimed_C!r}")

    @property
    def source_dim(self) -> int:
        return self.source.dim

    @property
    def target_dim(self) -> int:
        return self.target.dim

    def apply(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.source.dim:
            raise MetricError(f"{self.name} expects dimension {self.source.dim}, got {pts.shape[1]}")
        if self.vectorized:
            out = np.asarray(self.rule(pts), dtype=float)
        else:
            out = np.array([np.asarray(self.rule(p), dtype=float).reshape(-1) for p in pts])
        return out.reshape(len(pts), self.target.dim)

    def __call__(self, x) -> np.ndarray:
        return self.apply(as_vector(x)[None, :])[0]


def identity(metric: Metric) -> LipschitzMap:
    return LipschitzMap(lambda X: X, metric, metric, 1.0, vectorized=True, name="identity")


def scaling(c: float, metric: Metric) -> LipschitzMap:
    """``x -> c x`` on a normed space; Lipschitz with constant ``|c|``."""
    c = float(c)
    return LipschitzMap(lambda X: c * X, metric, metric, abs(c), vectorized=True, name=f"scale:{c}")


def constant(value, source: Metric, target: Metric) -> LipschitzMap:
    v = as_vector(value, target.dim)
    return LipschitzMap(lambda X: np.tile(v, (len(X), 1)), source, target, 0.0,
                        vectorized=True, name="constant")


def distance_to(p, metric: Metric) -> LipschitzMap:
    """``x -> d(p, x)`` into the real line; always 1-Lipschitz."""
    p = metric.admit(as_vector(p, metric.dim))

    def rule(X):
        return metric.rows(np.broadcast_to(p, X.shape), X)[:, None]

    return LipschitzMap(rule, metric, Metric.euclidean(1), 1.0, vectorized=True, name="dist-to")


def projection(plane: Plane) -> LipschitzMap:
    """Orthogonal projection onto ``plane``, 1-Lipschitz for the Euclidean metric."""
    E = Metric.euclidean(plane.dim)
    B, b = plane.basis, plane.basepoint

    def rule(X):
        return b + ((X - b) @ B.T) @ B

    return LipschitzMap(rule, E, E, 1.0, vectorized=True, name="project")


def compose(f: LipschitzMap, g: LipschitzMap) -> LipschitzMap:
    """``g o f``: apply ``f`` first. Claimed constant is the product of the two."""
    if f.target != g.source:
        raise MetricError(f"cannot compose: {f.name} lands in {f.target.spec}/{f.target.dim}, "
                          f"{g.name} starts from {g.source.spec}/{g.source.dim}")
    C = None if f.claimed_C is None or g.claimed_C is None else f.claimed_C * g.claimed_C
    return LipschitzMap(lambda X: g.apply(f.apply(X)), f.source, g.target, C,
                        vectorized=True, name=f"{g.name}o{f.name}")


class Diameter(NamedTuple):
    value: float
    pair: Tuple[int, int]


def diameter(points, m: Metric) -> Diameter:
    """Largest pairwise distance, with the first maximal pair in scan order."""
    if len(points) == 0:
        raise ValueError("diameter of an empty set")
    pts = m.admit(np.atleast_2d(np.asarray(points, dtype=float)))
    code, p = m._code()
    if code is not None:
        val, i, j = kernels.pairwise_max(pts, code, p)
        return Diameter(float(val), (int(i), int(j)))
    best, pair = 0.0, (0, 0)
    for i in range(len(pts) - 1):
        rest = pts[i + 1:]
        d = m.rows(np.broadcast_to(pts[i], rest.shape), rest)
        j = int(np.argmax(d))
        if d[j] > best:
            best, pair = float(d[j]), (i, i + 1 + j)
    return Diameter(best, pair)


def sample_pairs(metric: Metric, count: int, seed: int = 0, scale: float = 1.0):
    """Seeded Gaussian point pairs ``(X, Y)``, pushed onto the sphere for sphere metrics."""
    rng = np.random.default_rng(seed)
    X = scale * rng.standard_normal((count, metric.dim))
    Y = scale * rng.standard_normal((count, metric.dim))
    if metric.on_sphere:
        X /= np.linalg.norm(X, axis=1)[:, None]
        Y /= np.linalg.norm(Y, axis=1)[:, None]
    return X, Y


def _ratios(f: LipschitzMap, pairs):
    X, Y = (np.atleast_2d(np.asarray(z, dtype=float)) for z in pairs)
    d = f.source.rows(X, Y)
    rho = f.target.rows(f.apply(X), f.apply(Y))
    return X, Y, d, rho


def estimate_lipschitz_constant(f: LipschitzMap, pairs) -> float:
    """Largest sampled ratio ``rho(f(x), f(y)) / d(x, y)``; a lower bound on the constant.

    Pairs at distance zero are skipped.
    """
    _, _, d, rho = _ratios(f, pairs)
    ok = d > 0.0
    if not np.any(ok):
        raise ValueError("every sampled pair is degenerate (distance 0)")
    return float(np.max(rho[ok] / d[ok]))


class LipschitzViolation(NamedTuple):
    index: int
    x: np.ndarray
    y: np.ndarray
    image_distance: float
    bound: float


def verify_lipschitz(f: LipschitzMap, C: float, pairs) -> List[LipschitzViolation]:
    """Pairs breaking ``rho(f(x), f(y)) <= C d(x, y)`` (with 1e-12 relative slack)."""
    if C < 0:
        raise ValueError("C must be >= 0")
    X, Y, d, rho = _ratios(f, pairs)
    bound = C * d * (1.0 + RATIO_SLACK)
    bad = np.nonzero(rho > bound)[0]
    return [LipschitzViolation(int(i), X[i], Y[i], float(rho[i]), float(bound[i])) for i in bad]


def image_diameter_bound_check(f: LipschitzMap, E, C: Optional[float] = None) -> bool:
    """Whether ``diam f(E) <= C diam E`` on the finite set ``E``."""
    C = f.claimed_C if C is None else C
    if C is None:
        raise ValueError("no constant given and the map claims none")
    E = np.atleast_2d(np.asarray(E, dtype=float))
    if len(E) == 0:
        raise ValueError("E must be nonempty")
    lhs = diameter(f.apply(E), f.target).value
    rhs = diameter(E, f.source).value
    return lhs <= C * rhs * (1.0 + RATIO_SLACK)


def parse_map(spec: str, metric: Metric) -> LipschitzMap:
    """``scale:<c>``, ``dist-to:<point>`` or ``project:<v1>;<v2>...[@<basepoint>]``."""
    from .curves import CurveError, parse_number, parse_point

    name, _, arg = spec.partition(":")
    try:
        if name == "scale" and arg:
            return scaling(parse_number(arg), metric)
        if name == "dist-to" and arg:
            return distance_to(parse_point(arg, metric.dim), metric)
        if name == "project" and arg:
            span, _, base = arg.partition("@")
            vecs = [parse_point(v, metric.dim) for v in span.split(";")]
            bp = parse_point(base, metric.dim) if base else np.zeros(metric.dim)
            return projection(Plane.spanned(bp, vecs))
    except CurveError as exc:
        raise MetricError(f"bad map spec {spec!r}: {exc}") from None
    raise MetricError(f"unknown map spec {spec!r}")


__all__ = [
    "LipschitzMap", "identity", "scaling", "constant", "distance_to", "projection",
    "compose", "Diameter", "diameter", "sample_pairs", "estimate_lipschitz_constant",
    "LipschitzViolation", "verify_lipschitz", "image_diameter_bound_check", "parse_map",
]
