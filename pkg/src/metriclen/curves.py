"""Curves, partition sums and length estimation.

A curve is a map from a closed interval into R^n, evaluated in batches:
``curve.evaluate(ts)`` returns an ``(len(ts), dim)`` array. Lengths are
suprema of partition sums, so every estimate here approaches the true length
from below.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .metric import INF, Metric, MetricError, as_vector, check_p, norm_eval

DEFAULT_TOL = 1e-9
DEFAULT_MAX_SEGMENTS = 2**20
MIN_SEGMENTS = 16
PLATEAU_TOL = 1e-13
GL_ORDER = 5
MAX_QUAD_DEPTH = 40


class CurveError(ValueError):
    """Malformed curve, partition or curve file."""


class LengthNotConverged(CurveError):
    pass


class QuadratureError(CurveError):
    pass


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise CurveError(f"interval endpoints must be finite, got [{a}, {b}]")
        if a > b:
            raise CurveError(f"interval needs a <= b, got [{a}, {b}]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def width(self) -> float:
        return self.b - self.a

    def __contains__(self, t) -> bool:
        return self.a <= t <= self.b


@dataclass(frozen=True, eq=False)
class Partition:
    """Strictly increasing knots ``t_0 < ... < t_n`` with ``n >= 1``."""

    knots: np.ndarray

    def __post_init__(self):
        k = np.array(self.knots, dtype=float).reshape(-1)
        if k.size < 2:
            raise CurveError("a partition needs at least two knots")
        if not np.all(np.isfinite(k)):
            raise CurveError("partition knots must be finite")
        if np.any(np.diff(k) <= 0.0):
            raise CurveError("partition knots must be strictly increasing")
        k.flags.writeable = False
        object.__setattr__(self, "knots", k)

    @classmethod
    def uniform(cls, interval: Interval, n: int) -> "Partition":
        return cls(_uniform_knots(interval.a, interval.b, n))

    @property
    def interval(self) -> Interval:
        return Interval(self.knots[0], self.knots[-1])

    @property
    def segments(self) -> int:
        return self.knots.size - 1

    def refines(self, other: "Partition") -> bool:
        return bool(np.all(np.isin(other.knots, self.knots)))


def _uniform_knots(a: float, b: float, n: int) -> np.ndarray:
    # k/n is exact for dyadic n, so successive doublings nest bitwise
    t = a + (b - a) * (np.arange(n + 1) / n)
    t[0], t[-1] = a, b
    return t


def refine(P: Partition) -> Partition:
    """Insert the midpoint of every pair of consecutive knots."""
    k = P.knots
    out = np.empty(2 * k.size - 1)
    out[0::2] = k
    out[1::2] = 0.5 * (k[:-1] + k[1:])
    return Partition(out)


class Curve:
    """Base class; subclasses provide ``domain``, ``dim`` and ``_eval``."""

    domain: Interval
    dim: int
    deriv = None

    def _eval(self, ts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float).reshape(-1)
        if ts.size and (ts.min() < self.domain.a or ts.max() > self.domain.b):
            raise CurveError(f"parameters outside the domain [{self.domain.a}, {self.domain.b}]")
        out = self._eval(ts)
        if out.shape != (ts.size, self.dim):
            raise CurveError(f"curve rule returned shape {out.shape}, expected {(ts.size, self.dim)}")
        return out

    def __call__(self, t):
        if np.ndim(t) == 0:
            return self.evaluate([t])[0]
        return self.evaluate(t)

    def restrict(self, a: float, b: float) -> "Curve":
        if not (self.domain.a <= a <= b <= self.domain.b):
            raise CurveError(f"[{a}, {b}] is not inside the domain [{self.domain.a}, {self.domain.b}]")
        return replace(self, domain=Interval(a, b))

    @property
    def start(self) -> np.ndarray:
        return self(self.domain.a)

    @property
    def end(self) -> np.ndarray:
        return self(self.domain.b)


@dataclass(frozen=True, eq=False)
class Polyline(Curve):
    """Samples joined by linear interpolation in ambient coordinates.

    With ``on_sphere`` the interpolated points are pushed back onto the unit
    sphere, so segments become great-circle arcs.
    """

    params: np.ndarray
    points: np.ndarray
    on_sphere: bool = False
    domain: Optional[Interval] = None
    dim: int = field(init=False)

    def __post_init__(self):
        params = np.array(self.params, dtype=float).reshape(-1)
        points = np.array(self.points, dtype=float, ndmin=2)
        if params.size == 0:
            raise CurveError("params: a polyline needs at least one sample")
        if points.shape[0] != params.size:
            raise CurveError(f"points: {points.shape[0]} points for {params.size} params")
        if not (np.all(np.isfinite(params)) and np.all(np.isfinite(points))):
            raise CurveError("params/points: non-finite values")
        if np.any(np.diff(params) <= 0.0):
            raise CurveError("params: must be strictly increasing")
        params.flags.writeable = False
        points.flags.writeable = False
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "dim", points.shape[1])
        dom = self.domain or Interval(params[0], params[-1])
        if dom.a < params[0] or dom.b > params[-1]:
            raise CurveError("domain: polyline samples do not cover the domain")
        object.__setattr__(self, "domain", dom)

    def _eval(self, ts):
        p, P = self.params, self.points
        if p.size == 1:
            return np.tile(P[0], (ts.size, 1))
        i = np.clip(np.searchsorted(p, ts, side="right") - 1, 0, p.size - 2)
        f = ((ts - p[i]) / (p[i + 1] - p[i]))[:, None]
        out = (1.0 - f) * P[i] + f * P[i + 1]
        if self.on_sphere:
            nrm = np.linalg.norm(out, axis=1)
            out = out / np.where(nrm > 0.0, nrm, 1.0)[:, None]
        return out

    def interior_knots(self) -> np.ndarray:
        a, b = self.domain.a, self.domain.b
        return self.params[(self.params > a) & (self.params < b)]


@dataclass(frozen=True, eq=False)
class Parametric(Curve):
    """Curve given by a rule ``ts -> (len(ts), dim)`` and an optional derivative rule.

    Set ``vectorized=False`` for rules that take one scalar and return one point.
    """

    domain: Interval
    rule: Callable
    dim: int
    deriv: Optional[Callable] = None
    vectorized: bool = True

    def _call(self, fn, ts):
        if self.vectorized:
            return np.asarray(fn(ts), dtype=float).reshape(ts.size, self.dim)
        return np.array([np.asarray(fn(t), dtype=float).reshape(self.dim) for t in ts]).reshape(ts.size, self.dim)

    def _eval(self, ts):
        return self._call(self.rule, ts)

    def derivative(self, ts) -> np.ndarray:
        if self.deriv is None:
            raise CurveError("curve has no derivative rule")
        ts = np.asarray(ts, dtype=float).reshape(-1)
        return self._call(self.deriv, ts)


@dataclass(frozen=True)
class LengthEstimate:
    """Partition-sum length. ``value`` is a lower bound whether or not it converged."""

    value: float
    segments: int
    converged: bool
    lower_bound: bool = True
    trace: tuple = ()


def _check_dim(c: Curve, m: Metric):
    if c.dim != m.dim:
        raise MetricError(f"curve lives in dimension {c.dim}, metric in {m.dim}")


def partition_sum(c: Curve, m: Metric, P: Partition) -> float:
    """Sum of distances between curve points at consecutive knots."""
    _check_dim(c, m)
    if P.knots[0] != c.domain.a or P.knots[-1] != c.domain.b:
        raise CurveError(
            f"partition spans [{P.knots[0]}, {P.knots[-1]}] but the curve domain is "
            f"[{c.domain.a}, {c.domain.b}]")
    return m.chord_sum(c.evaluate(P.knots))


def estimate_length(c: Curve, m: Metric, tol: float = DEFAULT_TOL,
                    max_segments: int = DEFAULT_MAX_SEGMENTS, *,
                    min_segments: int = MIN_SEGMENTS) -> LengthEstimate:
    """Length by repeatedly doubling a uniform dyadic partition.

    Stops once two consecutive doublings each raise the sum by a relative
    amount below ``tol`` (and at least ``min_segments`` are in use), or when
    the next doubling would exceed ``max_segments``. Polyline knots are
    merged into every grid so corners are never cut.
    """
    _check_dim(c, m)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_segments < 2:
        raise ValueError("max_segments must be at least 2")
    a, b = c.domain.a, c.domain.b
    if a == b:
        return LengthEstimate(0.0, 1, True, trace=((1, 0.0),))

    extra = c.interior_knots() if isinstance(c, Polyline) else None

    def grid(n):
        t = _uniform_knots(a, b, n)
        if extra is not None and extra.size:
            t = np.union1d(t, extra)
        return t

    n = 1
    knots = grid(n)
    pts = c.evaluate(knots)
    lam = m.chord_sum(pts)
    trace = [(knots.size - 1, lam)]
    small = 0
    converged = False
    while 2 * n <= max_segments:
        n2 = 2 * n
        if extra is None:
            mids = a + (b - a) * ((2 * np.arange(n) + 1) / n2)
            if np.any(mids <= knots[:-1]) or np.any(mids >= knots[1:]):
                break  # grid finer than float resolution
            new = np.empty((2 * n + 1, c.dim))
            new[0::2] = pts
            new[1::2] = c.evaluate(mids)
            full = np.empty(2 * n + 1)
            full[0::2] = knots
            full[1::2] = mids
            knots, pts = full, new
        else:
            knots = grid(n2)
            pts = c.evaluate(knots)
        lam2 = m.chord_sum(pts)
        inc = (lam2 - lam) / max(lam2, 1e-300)
        small = small + 1 if inc < tol else 0
        n, lam = n2, lam2
        trace.append((knots.size - 1, lam))
        if small >= 2 and n >= min_segments:
            converged = True
            break
    return LengthEstimate(lam, knots.size - 1, converged, trace=tuple(trace))


def arclength_function(c: Curve, m: Metric, r: float, tol: float = DEFAULT_TOL,
                       max_segments: int = DEFAULT_MAX_SEGMENTS) -> float:
    """Length of ``c`` restricted to ``[a, r]``."""
    if r not in c.domain:
        raise CurveError(f"r = {r} lies outside [{c.domain.a}, {c.domain.b}]")
    if r == c.domain.a:
        return 0.0
    return estimate_length(c.restrict(c.domain.a, r), m, tol, max_segments).value


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(GL_ORDER)


def _norm_rows(norm, vecs: np.ndarray) -> np.ndarray:
    if callable(norm):
        return np.array([float(norm(v)) for v in vecs])
    p = check_p(norm)
    a = np.abs(vecs)
    if p is INF:
        return a.max(axis=1)
    if p == 2.0:
        return np.sqrt(np.einsum("ij,ij->i", vecs, vecs))
    return np.array([norm_eval(p, v) for v in vecs])


def integral_length(c: Curve, norm=2.0, tol: float = 1e-10) -> float:
    """Integral of ``norm(c'(u))`` over the domain.

    Composite 5-point Gauss-Legendre with adaptive bisection; a panel is
    accepted when its two halves agree with it to ``tol`` relative to the
    whole-interval estimate, scaled by the panel's share of the domain.
    """
    if getattr(c, "deriv", None) is None:
        raise CurveError("integral_length needs a curve with a derivative rule")
    a, b = c.domain.a, c.domain.b
    if a == b:
        return 0.0

    def panel(lo, hi):
        half = 0.5 * (hi - lo)
        u = 0.5 * (lo + hi) + half * _GL_NODES
        return half * float(np.dot(_GL_WEIGHTS, _norm_rows(norm, c.derivative(u))))

    whole = panel(a, b)
    scale = max(abs(whole), 1e-300)
    total = 0.0
    stack = [(a, b, whole, 0)]
    while stack:
        lo, hi, est, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left, right = panel(lo, mid), panel(mid, hi)
        if abs(left + right - est) <= tol * scale * (hi - lo) / (b - a):
            total += left + right
        elif depth >= MAX_QUAD_DEPTH:
            raise QuadratureError(f"quadrature did not converge on [{lo}, {hi}] at depth {depth}")
        else:
            stack.append((mid, hi, right, depth + 1))
            stack.append((lo, mid, left, depth + 1))
    return total


def reparametrize_by_arclength(c: Curve, m: Metric, samples: int = 1025,
                               tol: float = DEFAULT_TOL,
                               max_segments: int = DEFAULT_MAX_SEGMENTS) -> Polyline:
    """Arc-length parametrization ``q`` with ``q(length(a, r)) = c(r)``.

    Cumulative lengths come from per-cell estimates on a uniform r-grid of
    ``samples`` points (additivity). Cells of zero length collapse, so
    plateaus of the arc-length function leave no trace in ``q``.
    """
    _check_dim(c, m)
    if samples < 2:
        raise ValueError("samples must be at least 2")
    a, b = c.domain.a, c.domain.b
    if a == b:
        return Polyline([0.0], c.evaluate([a]), on_sphere=m.on_sphere)
    r = _uniform_knots(a, b, samples - 1)
    cells = []
    for lo, hi in zip(r[:-1], r[1:]):
        est = estimate_length(c.restrict(lo, hi), m, tol, max_segments)
        if not est.converged:
            raise LengthNotConverged(
                f"length did not converge on [{lo}, {hi}] (lower bound {est.value!r} "
                f"at {est.segments} segments)")
        cells.append(est.value)
    cum = np.concatenate(([0.0], np.add.accumulate(cells)))
    pts = m.admit(c.evaluate(r))
    keep = [0]
    for i in range(1, samples):
        if cum[i] - cum[keep[-1]] > PLATEAU_TOL:
            keep.append(i)
    return Polyline(cum[keep], pts[keep], on_sphere=m.on_sphere)


def compose_with_map(f, c: Curve) -> Parametric:
    """Pointwise ``f o c`` for a map exposing ``apply(points)`` and source/target dims."""
    if f.source_dim != c.dim:
        raise MetricError(f"map expects dimension {f.source_dim}, curve has {c.dim}")
    return Parametric(c.domain, lambda ts: f.apply(c.evaluate(ts)), f.target_dim)


@dataclass(frozen=True, eq=False)
class MonotoneMap:
    """Piecewise-linear nondecreasing map given by knot pairs ``(xs[i], ys[i])``."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float).reshape(-1)
        ys = np.array(self.ys, dtype=float).reshape(-1)
        if xs.size < 2 or xs.size != ys.size:
            raise CurveError("monotone map needs matching xs/ys with at least two knots")
        if np.any(np.diff(xs) <= 0.0):
            raise CurveError("monotone map: xs must be strictly increasing")
        if np.any(np.diff(ys) < 0.0):
            raise CurveError("monotone map: ys must be nondecreasing")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def domain(self) -> Interval:
        return Interval(self.xs[0], self.xs[-1])

    def __call__(self, t):
        return np.interp(t, self.xs, self.ys)

    def slope(self, t) -> np.ndarray:
        i = np.clip(np.searchsorted(self.xs, t, side="right") - 1, 0, self.xs.size - 2)
        return (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])


def reparametrize_domain(c: Curve, phi: MonotoneMap) -> Parametric:
    """``c o phi`` for a monotone map of ``[alpha, beta]`` onto the domain of ``c``."""
    if not isinstance(phi, MonotoneMap):
        raise CurveError("reparametrize_domain needs a MonotoneMap")
    a, b = c.domain.a, c.domain.b
    if phi.ys[0] != a or phi.ys[-1] != b:
        raise CurveError(f"phi maps onto [{phi.ys[0]}, {phi.ys[-1]}], not onto [{a}, {b}]")

    def rule(ts):
        return c.evaluate(np.clip(phi(ts), a, b))

    deriv = None
    if getattr(c, "deriv", None) is not None:
        def deriv(ts):
            return c.derivative(np.clip(phi(ts), a, b)) * phi.slope(ts)[:, None]

    return Parametric(phi.domain, rule, c.dim, deriv=deriv)


# builtin curves

def circle(a: float = 0.0, b: float = 2 * math.pi, speed: float = 1.0) -> Parametric:
    """``t -> (cos(speed t), sin(speed t))``."""
    def rule(t):
        return np.column_stack((np.cos(speed * t), np.sin(speed * t)))

    def deriv(t):
        return speed * np.column_stack((-np.sin(speed * t), np.cos(speed * t)))

    return Parametric(Interval(a, b), rule, 2, deriv=deriv)


def helix(a: float = 0.0, b: float = 2 * math.pi) -> Parametric:
    def rule(t):
        return np.column_stack((np.cos(t), np.sin(t), t))

    def deriv(t):
        return np.column_stack((-np.sin(t), np.cos(t), np.ones_like(t)))

    return Parametric(Interval(a, b), rule, 3, deriv=deriv)


def segment(x, y) -> Parametric:
    """``x + t (y - x)`` on ``[0, 1]``."""
    x, y = as_vector(x), as_vector(y)
    if x.size != y.size:
        raise MetricError(f"segment endpoints differ in dimension: {x.size} vs {y.size}")
    d = y - x

    def rule(t):
        t = np.asarray(t)[:, None]
        return (1.0 - t) * x + t * y

    return Parametric(Interval(0.0, 1.0), rule, x.size, deriv=lambda t: np.tile(d, (len(t), 1)))


def real_function(f: Callable, a: float, b: float, deriv: Optional[Callable] = None) -> Parametric:
    """Graph-free curve ``t -> f(t)`` into the real line; ``f`` must be vectorized."""
    d = None if deriv is None else (lambda t: np.asarray(deriv(t), dtype=float)[:, None])
    return Parametric(Interval(a, b), lambda t: np.asarray(f(t), dtype=float)[:, None], 1, deriv=d)


def _tcos(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    nz = t != 0.0
    out[nz] = t[nz] * np.cos(np.pi / t[nz])
    return out


def graph_tcos(a: float = 0.0, b: float = 1.0) -> Parametric:
    """``t cos(pi/t)`` with value 0 at 0: continuous, not of bounded variation near 0."""
    return real_function(_tcos, a, b)


_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?\s*\*?\s*(pi)?\s*$")


def parse_number(token: str) -> float:
    """A decimal, ``pi``, or ``<decimal>*pi`` (also ``<decimal>pi``)."""
    m = _NUMBER.match(token)
    if not m or (m.group(1) is None and m.group(2) is None):
        raise CurveError(f"bad number {token!r}")
    val = float(m.group(1)) if m.group(1) is not None else 1.0
    return val * math.pi if m.group(2) else val


def parse_point(token: str, dim: Optional[int] = None) -> np.ndarray:
    """``e<k>`` (1-based basis vector, needs ``dim``) or comma-separated coordinates."""
    s = token.strip()
    m = re.fullmatch(r"(-?)e(\d+)", s)
    if m:
        if dim is None:
            raise CurveError(f"point {token!r} needs an explicit dimension")
        k = int(m.group(2))
        if not 1 <= k <= dim:
            raise CurveError(f"point {token!r} out of range for dimension {dim}")
        v = np.zeros(dim)
        v[k - 1] = -1.0 if m.group(1) else 1.0
        return as_vector(v)
    s = s.strip("()[] ")
    try:
        v = as_vector([parse_number(x) for x in s.split(",")])
    except (CurveError, MetricError):
        raise CurveError(f"bad point {token!r}") from None
    if dim is not None and v.size != dim:
        raise CurveError(f"point {token!r} has dimension {v.size}, expected {dim}")
    return v


_BUILTIN = re.compile(r"^\s*([a-z][a-z-]*)\s*\[(.*)\]\s*$")


def parse_builtin(spec: str) -> Parametric:
    """Builtin curves: ``circle[a,b]`` (optional ``,speed``), ``helix[a,b]``,
    ``segment[x;y]`` and ``graph-tcos[a,b]``."""
    m = _BUILTIN.match(spec)
    if not m:
        raise CurveError(f"bad curve spec {spec!r}: expected name[args]")
    name, body = m.group(1), m.group(2)
    if name == "segment":
        parts = body.split(";")
        if len(parts) != 2:
            raise CurveError(f"segment needs two points separated by ';', got {body!r}")
        return segment(parse_point(parts[0]), parse_point(parts[1]))
    args = [parse_number(x) for x in body.split(",")] if body.strip() else []
    try:
        if name == "circle" and len(args) in (2, 3):
            return circle(*args)
        if name == "helix" and len(args) == 2:
            return helix(*args)
        if name == "graph-tcos" and len(args) == 2:
            return graph_tcos(*args)
    except CurveError as exc:
        raise CurveError(f"{spec!r}: {exc}") from None
    if name not in ("circle", "helix", "graph-tcos"):
        raise CurveError(f"unknown builtin curve {name!r}")
    raise CurveError(f"wrong number of arguments for {name!r}: {body!r}")


def curve_from_dict(doc: dict, on_sphere: bool = False) -> Polyline:
    if not isinstance(doc, dict):
        raise CurveError("curve document must be a JSON object")
    for key in ("dim", "params", "points"):
        if key not in doc:
            raise CurveError(f"missing field {key!r}")
    dim = doc["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise CurveError(f"field 'dim' must be a positive integer, got {dim!r}")
    params, points = doc["params"], doc["points"]
    if not isinstance(params, list) or not all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in params):
        raise CurveError("field 'params' must be a list of numbers")
    if not isinstance(points, list) or any(not isinstance(p, list) or len(p) != dim for p in points):
        raise CurveError(f"field 'points' must be a list of {dim}-element lists")
    try:
        return Polyline(params, points, on_sphere=on_sphere)
    except CurveError as exc:
        raise CurveError(f"field {exc}") from None


def load_curve(text: str, on_sphere: bool = False) -> Polyline:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CurveError(f"invalid JSON: {exc}") from None
    return curve_from_dict(doc, on_sphere)


def _fmt(x: float) -> float:
    return float(f"{x:.15g}")


def dump_curve(c: Polyline) -> str:
    """Curve JSON with every number at 15 significant digits."""
    doc = {
        "dim": c.dim,
        "params": [_fmt(t) for t in c.params],
        "points": [[_fmt(x) for x in p] for p in c.points],
    }
    return json.dumps(doc)


def sample_polyline(c: Curve, n: int, on_sphere: bool = False) -> Polyline:
    """Polyline through ``n + 1`` uniformly spaced samples of ``c``."""
    t = _uniform_knots(c.domain.a, c.domain.b, n)
    return Polyline(t, c.evaluate(t), on_sphere=on_sphere)


__all__: Sequence[str] = [
    "Interval", "Partition", "Curve", "Polyline", "Parametric", "LengthEstimate",
    "MonotoneMap", "partition_sum", "refine", "estimate_length", "arclength_function",
    "integral_length", "reparametrize_by_arclength", "compose_with_map",
    "reparametrize_domain", "circle", "helix", "segment", "real_function", "graph_tcos",
    "parse_builtin", "parse_point", "parse_number", "load_curve", "dump_curve",
    "curve_from_dict", "sample_polyline", "CurveError", "LengthNotConverged",
    "QuadratureError",
]
