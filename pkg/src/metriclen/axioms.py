"""Sampling checks for metric and norm axioms and for the comparison inequalities.

Every check records how many cases it looked at, the worst margin
``lhs - rhs`` (positive means the inequality failed by that much) and up to
:data:`MAX_WITNESSES` concrete counterexamples. A case fails when its margin
exceeds ``tol * max(1, |rhs|)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .metric import INF, Metric, MetricError, check_p, norm_eval

EXHAUSTIVE_LIMIT = 50
SAMPLED_TRIPLES = 100_000
SAMPLED_PAIRS = 10_000
MAX_WITNESSES = 100


class Witness(NamedTuple):
    indices: Tuple[int, ...]
    lhs: float
    rhs: float
    margin: float
    points: Optional[Tuple] = None
    seed: Optional[int] = None


@dataclass
class AxiomCheck:
    name: str
    samples: int = 0
    violations: List[Witness] = field(default_factory=list)
    violation_count: int = 0
    worst_margin: float = -math.inf
    extremes: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.violation_count == 0

    def record(self, lhs, rhs, tol, indices, points=None, seed=None, strict=False):
        """Tally ``lhs <= rhs`` (``lhs < rhs`` when ``strict``) case-wise over arrays."""
        lhs = np.atleast_1d(np.asarray(lhs, dtype=float))
        rhs = np.atleast_1d(np.asarray(rhs, dtype=float))
        margin = lhs - rhs
        if margin.size == 0:
            return
        limit = tol * np.maximum(1.0, np.abs(rhs))
        bad = margin >= 0.0 if strict else margin > limit
        self.samples += margin.size
        self.worst_margin = max(self.worst_margin, float(margin.max()))
        idx = np.nonzero(bad)[0]
        self.violation_count += idx.size
        for k in idx[: max(0, MAX_WITNESSES - len(self.violations))]:
            pts = None if points is None else tuple(np.asarray(p[k]).tolist() for p in points)
            self.violations.append(Witness(tuple(int(i[k]) for i in indices), float(lhs[k]),
                                           float(rhs[k]), float(margin[k]), pts, seed))


@dataclass
class AxiomReport:
    checks: List[AxiomCheck] = field(default_factory=list)
    seed: Optional[int] = None

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def __getitem__(self, name: str) -> AxiomCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary(self) -> str:
        return "; ".join(f"{c.name}: {c.violation_count}/{c.samples} violations" for c in self.checks)

    def lines(self) -> List[str]:
        """One CSV line per check plus one per stored witness."""
        out = ["check,samples,violations,worst_margin"]
        for c in self.checks:
            out.append(f"{c.name},{c.samples},{c.violation_count},{c.worst_margin + 0.0:.15g}")
        for c in self.checks:
            for w in c.violations:
                ids = " ".join(str(i) for i in w.indices)
                out.append(f"witness,{c.name},{ids},{w.lhs:.15g},{w.rhs:.15g},{w.margin:.15g}")
        return out


class DistanceMatrix:
    """Table-backed distance on the indices ``0..k-1``."""

    def __init__(self, matrix):
        D = np.array(matrix, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] < 1:
            raise MetricError(f"distance matrix must be square, got shape {D.shape}")
        if not np.all(np.isfinite(D)):
            raise MetricError("distance matrix has non-finite entries")
        self.matrix = D

    def __len__(self):
        return self.matrix.shape[0]

    def __call__(self, i, j) -> float:
        return float(self.matrix[int(i), int(j)])

    @classmethod
    def from_csv(cls, text: str) -> "DistanceMatrix":
        rows = [r for r in text.strip().splitlines() if r.strip()]
        try:
            data = [[float(x) for x in r.split(",")] for r in rows]
        except ValueError as exc:
            raise MetricError(f"bad number in distance matrix: {exc}") from None
        if any(len(r) != len(data) for r in data):
            raise MetricError("distance matrix rows must all have as many entries as there are rows")
        return cls(data)


DistanceRule = Union[Metric, DistanceMatrix, Callable]


def _distance_table(d: DistanceRule, points) -> Tuple[np.ndarray, int, Optional[np.ndarray]]:
    if isinstance(d, DistanceMatrix):
        return d.matrix, len(d), None
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if isinstance(d, Metric):
        pts = d.admit(pts)
        return d.pairwise(pts), len(pts), pts
    k = len(pts)
    D = np.array([[float(d(pts[i], pts[j])) for j in range(k)] for i in range(k)])
    return D, k, pts


def _triples(k: int, seed: int, limit: int, count: int):
    if k <= limit:
        i, j, l = np.meshgrid(np.arange(k), np.arange(k), np.arange(k), indexing="ij")
        return i.ravel(), j.ravel(), l.ravel()
    rng = np.random.default_rng(seed)
    return tuple(rng.integers(0, k, count) for _ in range(3))


def check_metric_axioms(d: DistanceRule, points=None, tol: float = 1e-12, *, seed: int = 0,
                        exhaustive_limit: int = EXHAUSTIVE_LIMIT,
                        sampled_triples: int = SAMPLED_TRIPLES) -> AxiomReport:
    """Nonnegativity, zero diagonal, positivity off it, symmetry and the triangle inequality.

    ``d`` is a :class:`Metric`, a :class:`DistanceMatrix` (``points`` ignored)
    or a callable ``d(x, y)``. Triples are exhaustive up to
    ``exhaustive_limit`` points and seeded-sampled beyond.
    """
    D, k, pts = _distance_table(d, points)
    if k < 2:
        raise ValueError("need at least two points")
    report = AxiomReport(seed=seed)
    i, j = np.triu_indices(k, 1)
    ii, jj = np.indices((k, k))
    ii, jj = ii.ravel(), jj.ravel()

    def pick(*idx):
        return None if pts is None else tuple(pts[x] for x in idx)

    c = AxiomCheck("nonnegative")
    c.record(-D.ravel(), np.zeros(k * k), tol, (ii, jj), pick(ii, jj), seed)
    report.checks.append(c)

    c = AxiomCheck("zero-diagonal")
    diag = np.arange(k)
    c.record(np.abs(np.diag(D)), np.zeros(k), tol, (diag,), pick(diag), seed)
    report.checks.append(c)

    c = AxiomCheck("positive-off-diagonal")
    if pts is not None:
        distinct = ~np.all(pts[i] == pts[j], axis=1)
        i2, j2 = i[distinct], j[distinct]
    else:
        i2, j2 = i, j
    c.record(np.zeros(i2.size), D[i2, j2], tol, (i2, j2), pick(i2, j2), seed, strict=True)
    report.checks.append(c)

    c = AxiomCheck("symmetry")
    c.record(np.abs(D[i, j] - D[j, i]), np.zeros(i.size), tol, (i, j), pick(i, j), seed)
    report.checks.append(c)

    c = AxiomCheck("triangle")
    a, b, e = _triples(k, seed, exhaustive_limit, sampled_triples)
    c.record(D[a, e], D[a, b] + D[b, e], tol, (a, b, e), pick(a, b, e), seed)
    report.checks.append(c)
    return report


def _as_norm(N) -> Callable:
    if callable(N):
        return N
    p = check_p(N)
    return lambda x: norm_eval(p, x)


def standard_norm_sample(dim: int, count: int = 64, seed: int = 0):
    """Basis vectors, their pairwise sums and seeded Gaussian vectors, plus test scalars."""
    rng = np.random.default_rng(seed)
    basis = list(np.eye(dim))
    sums = [basis[a] + basis[b] for a in range(dim) for b in range(a + 1, dim)]
    gauss = list(rng.standard_normal((count, dim)) * rng.uniform(0.1, 10.0, (count, 1)))
    scalars = np.concatenate(([-3.0, -1.0, -0.5, 0.0, 0.25, 1.0, 2.0, 10.0], rng.normal(0, 5, 8)))
    return np.array(basis + sums + gauss), scalars


def check_norm_axioms(N, vectors, scalars=(-2.0, -1.0, 0.0, 0.5, 3.0), tol: float = 1e-12, *,
                      seed: int = 0, max_pairs: int = SAMPLED_PAIRS) -> AxiomReport:
    """Zero exactly at zero, absolute homogeneity, subadditivity, reverse triangle inequality.

    ``N`` is a callable norm or a p-norm exponent (float or ``INF``).
    """
    norm = _as_norm(N)
    V = np.atleast_2d(np.asarray(vectors, dtype=float))
    S = np.asarray(scalars, dtype=float).ravel()
    k, n = V.shape
    nv = np.array([float(norm(v)) for v in V])
    report = AxiomReport(seed=seed)

    c = AxiomCheck("zero-at-zero")
    z = float(norm(np.zeros(n)))
    c.record(abs(z), 0.0, tol, (np.zeros(1, int),))
    report.checks.append(c)

    c = AxiomCheck("positive")
    nz = np.nonzero(np.any(V != 0.0, axis=1))[0]
    c.record(np.zeros(nz.size), nv[nz], tol, (nz,), (V[nz],), seed, strict=True)
    report.checks.append(c)

    c = AxiomCheck("homogeneity")
    vi, si = np.meshgrid(np.arange(k), np.arange(S.size), indexing="ij")
    vi, si = vi.ravel(), si.ravel()
    scaled = np.array([float(norm(S[b] * V[a])) for a, b in zip(vi, si)])
    expect = np.abs(S[si]) * nv[vi]
    c.record(np.abs(scaled - expect), np.zeros(vi.size), tol * np.maximum(1.0, expect),
             (vi, si), (V[vi], S[si]), seed)
    report.checks.append(c)

    if k * k <= max_pairs:
        a, b = (x.ravel() for x in np.indices((k, k)))
    else:
        rng = np.random.default_rng(seed)
        a, b = rng.integers(0, k, max_pairs), rng.integers(0, k, max_pairs)
    c = AxiomCheck("subadditivity")
    nsum = np.array([float(norm(V[x] + V[y])) for x, y in zip(a, b)])
    c.record(nsum, nv[a] + nv[b], tol, (a, b), (V[a], V[b]), seed)
    report.checks.append(c)

    c = AxiomCheck("reverse-triangle")
    ndiff = np.array([float(norm(V[x] - V[y])) for x, y in zip(a, b)])
    c.record(np.abs(nv[a] - nv[b]), ndiff, tol, (a, b), (V[a], V[b]), seed)
    report.checks.append(c)
    return report


def check_comparison_bounds(X, Y, tol: float = 1e-12, *, local_radius: float = 0.1,
                            local_factor: float = 1.01) -> AxiomReport:
    """Chord/arc comparisons for pairs of unit vectors.

    Checks ``|x-y| <= d(x,y) <= (pi/2)|x-y|``, the chord round trip
    ``2 sin(d/2) = |x-y|`` and the local ratio ``d <= local_factor |x-y|``
    for pairs closer than ``local_radius``. Coincident pairs are skipped.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    sph = Metric.sphere(X.shape[1])
    X, Y = sph.admit(X), sph.admit(Y)
    chord = Metric.euclidean(X.shape[1]).rows(X, Y)
    arc = sph.rows(X, Y)
    keep = np.nonzero(chord > 0.0)[0]
    ch, d = chord[keep], arc[keep]
    pts = (X[keep], Y[keep])
    report = AxiomReport()

    c = AxiomCheck("chord-below-arc")
    c.record(ch, d, tol, (keep,), pts)
    report.checks.append(c)

    c = AxiomCheck("arc-below-scaled-chord")
    c.record(d, (math.pi / 2) * ch, tol, (keep,), pts)
    ratio = d / ch if ch.size else np.zeros(0)
    if ratio.size:
        c.extremes = {"min_ratio": float(ratio.min()), "max_ratio": float(ratio.max())}
    report.checks.append(c)

    c = AxiomCheck("chord-round-trip")
    c.record(np.abs(2.0 * np.sin(d / 2.0) - ch), np.zeros(ch.size), tol, (keep,), pts)
    report.checks.append(c)

    c = AxiomCheck("local-ratio")
    near = ch < local_radius
    c.record(d[near], local_factor * ch[near], tol, (keep[near],), (X[keep][near], Y[keep][near]))
    report.checks.append(c)
    return report


def check_norm_sandwich(vectors: Sequence, p_list=(1.0, 1.5, 2.0, 3.0, 10.0),
                        tol: float = 1e-12) -> AxiomReport:
    """``max|x_j| <= ||x||_p <= n^(1/p) max|x_j|`` for every vector and exponent.

    ``vectors`` may mix dimensions. ``extremes`` holds the smallest gap seen on
    each side, so tightness (zero gap) is visible.
    """
    lower = AxiomCheck("sup-below-p")
    upper = AxiomCheck("p-below-scaled-sup")
    low_gap, up_gap = math.inf, math.inf
    for idx, x in enumerate(vectors):
        x = np.asarray(x, dtype=float).ravel()
        sup = norm_eval(INF, x)
        for p in p_list:
            p = check_p(p)
            val = norm_eval(p, x)
            bound = sup if p is INF else x.size ** (1.0 / p) * sup
            lower.record(sup, val, tol, (np.array([idx]),))
            upper.record(val, bound, tol, (np.array([idx]),))
            low_gap = min(low_gap, val - sup)
            up_gap = min(up_gap, bound - val)
    lower.extremes = {"min_gap": low_gap}
    upper.extremes = {"min_gap": up_gap}
    return AxiomReport([lower, upper])


class Boundedness(NamedTuple):
    basepoint: int
    radius: float
    alternate: int
    alternate_radius: float
    alternate_bound: float

    @property
    def consistent(self) -> bool:
        return self.alternate_radius <= self.alternate_bound * (1.0 + 1e-12)


def check_boundedness(points, m: Metric) -> Boundedness:
    """Radius about the first point, cross-checked from the last point.

    Any other center ``q`` needs radius at most ``d(p, q) + t``; the result
    records both numbers for ``q`` = the last sample.
    """
    if len(points) == 0:
        raise ValueError("need a nonempty point set")
    pts = m.admit(np.atleast_2d(np.asarray(points, dtype=float)))
    t = float(m.rows(np.broadcast_to(pts[0], pts.shape), pts).max())
    q = len(pts) - 1
    tq = float(m.rows(np.broadcast_to(pts[q], pts.shape), pts).max())
    return Boundedness(0, t, q, tq, m.distance(pts[0], pts[q]) + t)


__all__ = [
    "Witness", "AxiomCheck", "AxiomReport", "DistanceMatrix", "check_metric_axioms",
    "standard_norm_sample", "check_norm_axioms", "check_comparison_bounds",
    "check_norm_sandwich", "Boundedness", "check_boundedness",
]
