"""Points, p-norms and the family of metrics everything else is generic over.

Points are plain 1-D float64 numpy arrays. :func:`as_vector` is the gate that
admits them (finite, at least one coordinate) and hands back a read-only copy.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Callable, Optional, Union

import numpy as np

from ._backend import DISCRETE, EUCLIDEAN, PNORM, SPHERICAL, SUP, kernels

SPHERE_TOL = 1e-9
ORTHO_TOL = 1e-12


class MetricError(ValueError):
    """Invalid input to a metric operation."""


class DimensionMismatch(MetricError):
    pass


class OffSphereError(MetricError):
    pass


class _Infinity(enum.Enum):
    INF = "inf"

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"


INF = _Infinity.INF
"""Tag selecting the sup norm. Deliberately not a float."""

PNormParam = Union[float, _Infinity]


def as_vector(x, dim: Optional[int] = None) -> np.ndarray:
    v = np.array(x, dtype=float, copy=True).reshape(-1) if np.ndim(x) else np.array([float(x)])
    if v.size == 0:
        raise MetricError("a vector needs at least one coordinate")
    if not np.all(np.isfinite(v)):
        raise MetricError(f"non-finite coordinate in {v!r}")
    if dim is not None and v.size != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {v.size}")
    v.flags.writeable = False
    return v


def check_p(p) -> PNormParam:
    """Validate a p-norm exponent; returns a float or :data:`INF`."""
    if p is INF:
        return INF
    if isinstance(p, str) and p.strip().lower() in ("inf", "infinity"):
        return INF
    try:
        val = float(p)
    except (TypeError, ValueError):
        raise MetricError(f"invalid p-norm exponent {p!r}") from None
    if math.isinf(val) and val > 0:
        return INF
    if not math.isfinite(val) or val < 1.0:
        raise MetricError(f"p-norm exponent must be >= 1, got {p!r}")
    return val


def norm_eval(p: PNormParam, x) -> float:
    """The p-norm of ``x``; ``p`` is a real >= 1 or :data:`INF`."""
    p = check_p(p)
    v = as_vector(x)
    a = np.abs(v)
    m = float(a.max())
    if p is INF or m == 0.0:
        return m
    if p == 2.0:
        s = float(np.dot(v, v))
        if 1e-280 <= s <= 1e280:
            return math.sqrt(s)
    if p == 1.0:
        return float(a.sum())
    # scaled to dodge overflow/underflow for large p
    return m * float(np.sum((a / m) ** p)) ** (1.0 / p)


class MetricKind(enum.Enum):
    EUCLIDEAN = "euclidean"
    PNORM = "pnorm"
    DISCRETE = "discrete"
    CHORDAL_SPHERE = "chordal-sphere"
    SPHERICAL = "sphere"
    CUSTOM_NORM = "custom-norm"


_SPHERE_KINDS = (MetricKind.CHORDAL_SPHERE, MetricKind.SPHERICAL)


@dataclass(frozen=True)
class Metric:
    """A distance on R^dim (or on the unit sphere inside it).

    Use the classmethod constructors; ``p`` is only meaningful for
    ``PNORM`` and ``norm`` only for ``CUSTOM_NORM``.
    """

    kind: MetricKind
    dim: int
    p: Optional[PNormParam] = None
    norm: Optional[Callable[[np.ndarray], float]] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise MetricError(f"dimension must be a positive integer, got {self.dim!r}")
        if self.kind in _SPHERE_KINDS and self.dim < 2:
            raise MetricError("sphere metrics need dim >= 2")
        if self.kind is MetricKind.PNORM:
            object.__setattr__(self, "p", check_p(self.p))
        if self.kind is MetricKind.CUSTOM_NORM and not callable(self.norm):
            raise MetricError("custom norm metric needs a callable norm")

    @classmethod
    def euclidean(cls, dim: int) -> "Metric":
        return cls(MetricKind.EUCLIDEAN, dim)

    @classmethod
    def pnorm(cls, p, dim: int) -> "Metric":
        return cls(MetricKind.PNORM, dim, p=p)

    @classmethod
    def discrete(cls, dim: int) -> "Metric":
        return cls(MetricKind.DISCRETE, dim)

    @classmethod
    def chordal_sphere(cls, dim: int) -> "Metric":
        return cls(MetricKind.CHORDAL_SPHERE, dim)

    @classmethod
    def sphere(cls, dim: int) -> "Metric":
        return cls(MetricKind.SPHERICAL, dim)

    @classmethod
    def from_norm(cls, norm: Callable[[np.ndarray], float], dim: int, *, seed: int = 0,
                  samples: int = 64) -> "Metric":
        """Wrap a user norm after it survives the axiom checker on a seeded sample."""
        from .axioms import check_norm_axioms, standard_norm_sample

        vectors, scalars = standard_norm_sample(dim, samples, seed)
        report = check_norm_axioms(norm, vectors, scalars)
        if not report.ok:
            raise MetricError(f"custom norm fails the norm axioms: {report.summary()}")
        return cls(MetricKind.CUSTOM_NORM, dim, norm=norm)

    @property
    def on_sphere(self) -> bool:
        return self.kind in _SPHERE_KINDS

    @property
    def is_norm(self) -> bool:
        return self.kind in (MetricKind.EUCLIDEAN, MetricKind.PNORM, MetricKind.CUSTOM_NORM)

    @property
    def spec(self) -> str:
        if self.kind is MetricKind.PNORM:
            return f"pnorm:{self.p}"
        return self.kind.value

    def _code(self):
        k = self.kind
        if k in (MetricKind.EUCLIDEAN, MetricKind.CHORDAL_SPHERE):
            return EUCLIDEAN, 2.0
        if k is MetricKind.PNORM:
            if self.p is INF:
                return SUP, 0.0
            if self.p == 2.0:
                return EUCLIDEAN, 2.0
            return PNORM, float(self.p)
        if k is MetricKind.DISCRETE:
            return DISCRETE, 0.0
        if k is MetricKind.SPHERICAL:
            return SPHERICAL, 0.0
        return None, 0.0

    def admit(self, points) -> np.ndarray:
        """Validate a point or an (m, dim) stack; sphere inputs get renormalized."""
        pts = np.array(points, dtype=float, order="C")
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[-1] != self.dim or pts.ndim != 2:
            raise DimensionMismatch(f"expected points of dimension {self.dim}, got shape {np.shape(points)}")
        if not np.all(np.isfinite(pts)):
            raise MetricError("non-finite coordinates")
        if self.on_sphere:
            nrm = np.sqrt(np.einsum("ij,ij->i", pts, pts))
            dev = np.abs(nrm - 1.0)
            if np.any(dev > SPHERE_TOL):
                i = int(np.argmax(dev))
                raise OffSphereError(f"point {pts[i].tolist()} has norm {nrm[i]!r}, off the unit sphere")
            fix = dev > 0.0
            if np.any(fix):
                pts[fix] /= nrm[fix, None]
        return pts[0] if single else pts

    def rows(self, a, b) -> np.ndarray:
        """Distances between matching rows of two (m, dim) stacks."""
        a = self.admit(np.atleast_2d(a))
        b = self.admit(np.atleast_2d(b))
        if a.shape != b.shape:
            raise DimensionMismatch(f"row stacks differ in shape: {a.shape} vs {b.shape}")
        code, p = self._code()
        if code is None:
            return np.array([float(self.norm(r)) for r in a - b])
        return kernels.row_distances(a, b, code, p)

    def chords(self, points) -> np.ndarray:
        """Distances between consecutive rows."""
        pts = self.admit(np.atleast_2d(points))
        code, p = self._code()
        if code is None:
            return np.array([float(self.norm(r)) for r in np.diff(pts, axis=0)])
        return kernels.chord_lengths(pts, code, p)

    def chord_sum(self, points) -> float:
        """Left-to-right sum of consecutive distances."""
        pts = self.admit(np.atleast_2d(points))
        code, p = self._code()
        if code is None:
            total = 0.0
            for r in np.diff(pts, axis=0):
                total += float(self.norm(r))
            return total
        return float(kernels.chord_sum(pts, code, p))

    def pairwise(self, points) -> np.ndarray:
        """Full distance matrix of a point stack."""
        pts = self.admit(np.atleast_2d(points))
        m = len(pts)
        out = np.zeros((m, m))
        for i in range(m):
            out[i] = self.rows(np.broadcast_to(pts[i], pts.shape), pts)
        return out

    def distance(self, x, y) -> float:
        return distance(self, x, y)


def distance(m: Metric, x, y) -> float:
    """Distance between two points under ``m``."""
    x = as_vector(x)
    y = as_vector(y)
    if x.size != m.dim or y.size != m.dim:
        raise DimensionMismatch(f"metric has dim {m.dim}, points have {x.size} and {y.size}")
    if m.kind is MetricKind.SPHERICAL:
        return spherical_distance(x, y)
    if m.kind is MetricKind.DISCRETE:
        return 0.0 if np.array_equal(x, y) else 1.0
    if m.kind is MetricKind.CUSTOM_NORM:
        return float(m.norm(x - y))
    x, y = m.admit(x), m.admit(y)
    if m.kind is MetricKind.PNORM:
        return norm_eval(m.p, x - y)
    d = x - y
    return float(np.sqrt(np.dot(d, d)))


def spherical_distance(x, y) -> float:
    """Great-circle distance between unit vectors, in [0, pi].

    Evaluated as ``2*atan2(|x-y|, |x+y|)``, which equals
    ``2*asin(|x-y|/2)`` on the sphere and keeps full precision near
    antipodes, where asin is ill-conditioned.
    """
    x = as_vector(x)
    y = as_vector(y)
    if x.size != y.size:
        raise DimensionMismatch(f"dimensions differ: {x.size} vs {y.size}")
    if x.size < 2:
        raise MetricError("spherical distance needs dim >= 2")
    m = Metric.sphere(x.size)
    x, y = m.admit(x), m.admit(y)
    d, s = x - y, x + y
    chord = math.sqrt(float(np.dot(d, d)))
    if chord / 2.0 > 1.0 + SPHERE_TOL:
        raise OffSphereError(f"half-chord {chord / 2.0!r} exceeds 1; input is corrupted")
    return 2.0 * math.atan2(chord, math.sqrt(float(np.dot(s, s))))


def chordal_from_geodesic(d: float) -> float:
    """Chord length ``2 sin(d/2)`` for a great-circle distance ``d``."""
    d = float(d)
    if not (0.0 <= d <= math.pi):
        raise MetricError(f"geodesic distance must lie in [0, pi], got {d!r}")
    return 2.0 * math.sin(d / 2.0)


def circle_point(t: float) -> np.ndarray:
    return as_vector((math.cos(t), math.sin(t)))


def in_open_ball(m: Metric, center, r: float, x) -> bool:
    return distance(m, center, x) < r


def in_closed_ball(m: Metric, center, r: float, x) -> bool:
    return distance(m, center, x) <= r


@dataclass(frozen=True, eq=False)
class Plane:
    """Affine k-plane ``basepoint + span(basis)`` with orthonormal basis rows."""

    basepoint: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        b = as_vector(self.basepoint)
        basis = np.array(self.basis, dtype=float, ndmin=2)
        if basis.shape[0] == 0 or basis.shape[1] != b.size:
            raise DimensionMismatch(f"basis of shape {basis.shape} does not fit dimension {b.size}")
        gram = basis @ basis.T
        if np.max(np.abs(gram - np.eye(len(basis)))) > ORTHO_TOL:
            raise MetricError("plane basis is not orthonormal")
        basis.flags.writeable = False
        object.__setattr__(self, "basepoint", b)
        object.__setattr__(self, "basis", basis)

    @classmethod
    def spanned(cls, basepoint, vectors) -> "Plane":
        """Plane through ``basepoint`` spanned by arbitrary independent vectors."""
        vecs = np.array(vectors, dtype=float, ndmin=2)
        q, r = np.linalg.qr(vecs.T)
        diag = np.abs(np.diag(r))
        if diag.size == 0 or diag.min() <= 1e-12 * max(1.0, diag.max()):
            raise MetricError("degenerate plane basis (vectors are dependent)")
        return cls(basepoint, q.T)

    @property
    def dim(self) -> int:
        return self.basepoint.size


def project_to_plane(x, plane: Plane) -> np.ndarray:
    """Orthogonal projection of ``x`` onto ``plane``."""
    x = as_vector(x)
    if x.size != plane.dim:
        raise DimensionMismatch(f"point has dim {x.size}, plane lives in dim {plane.dim}")
    rel = x - plane.basepoint
    return as_vector(plane.basepoint + plane.basis.T @ (plane.basis @ rel))


def great_circle_arc(x, y):
    """Shorter great-circle arc from ``x`` to ``y`` at unit speed on ``[0, d(x, y)]``.

    Coincident endpoints give a constant curve on ``[0, 0]``; antipodal
    endpoints are rejected since the shorter arc is not unique there.
    """
    from .curves import Interval, Parametric

    x = as_vector(x)
    y = as_vector(y)
    if x.size != y.size:
        raise DimensionMismatch(f"dimensions differ: {x.size} vs {y.size}")
    sph = Metric.sphere(x.size)
    x, y = sph.admit(x), sph.admit(y)
    if np.array_equal(x, y):
        return Parametric(Interval(0.0, 0.0), lambda t: np.tile(x, (len(t), 1)), x.size,
                          deriv=lambda t: np.zeros((len(t), x.size)))
    if np.linalg.norm(x + y) <= 1e-12:
        raise MetricError("antipodal endpoints: the shorter great-circle arc is not unique")
    d = spherical_distance(x, y)
    # the component of y orthogonal to the line through x spans the plane with x
    perp = y - project_to_plane(y, Plane(np.zeros(x.size), x[None, :]))
    nrm = np.linalg.norm(perp)
    if nrm == 0.0:
        raise MetricError("endpoints coincide after normalization")
    u = perp / nrm

    def rule(t):
        t = np.asarray(t, dtype=float)[:, None]
        return np.cos(t) * x + np.sin(t) * u

    def deriv(t):
        t = np.asarray(t, dtype=float)[:, None]
        return -np.sin(t) * x + np.cos(t) * u

    return Parametric(Interval(0.0, d), rule, x.size, deriv=deriv)


def _parse_decimal(token: str) -> float:
    try:
        Decimal(token)
    except InvalidOperation:
        raise MetricError(f"not a decimal number: {token!r}") from None
    return float(token)


def parse_metric(spec: str, dim: int) -> Metric:
    """Parse ``euclidean``, ``pnorm:<p>``, ``discrete``, ``chordal-sphere`` or ``sphere``."""
    s = spec.strip().lower()
    if s == "euclidean":
        return Metric.euclidean(dim)
    if s == "discrete":
        return Metric.discrete(dim)
    if s == "chordal-sphere":
        return Metric.chordal_sphere(dim)
    if s == "sphere":
        return Metric.sphere(dim)
    if s.startswith("pnorm:"):
        tok = s.split(":", 1)[1].strip()
        if tok == "inf":
            return Metric.pnorm(INF, dim)
        return Metric.pnorm(_parse_decimal(tok), dim)
    raise MetricError(f"unknown metric spec {spec!r}")
