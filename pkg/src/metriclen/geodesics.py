"""Minimal-length curves.

Exact minimizers where they are known (segments in normed spaces, short
great-circle arcs on the sphere) and an iterative polyline shortener for
everything else. The shortener replaces interior vertices by midpoints of
their neighbours and then re-spaces the vertices evenly by arc length; both
steps can only shorten the polyline. A curve whose length equals the
distance between its endpoints is minimal, which is what the certificate
reports.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from ._backend import kernels
from .curves import (DEFAULT_MAX_SEGMENTS, Curve, Parametric, Polyline, estimate_length,
                     segment)
from .metric import Metric, MetricError, MetricKind, as_vector, distance


@dataclass(frozen=True, eq=False)
class GeodesicProblem:
    metric: Metric
    start: np.ndarray
    end: np.ndarray
    initial: Optional[Polyline] = None

    def __post_init__(self):
        m = self.metric
        start = m.admit(as_vector(self.start, m.dim))
        end = m.admit(as_vector(self.end, m.dim))
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "end", end)
        if self.initial is not None:
            pts = m.admit(self.initial.points)
            if not (np.allclose(pts[0], start, atol=1e-12) and np.allclose(pts[-1], end, atol=1e-12)):
                raise MetricError("initial polyline does not connect start to end")


@dataclass(frozen=True)
class ShorteningConfig:
    max_sweeps: int = 10_000
    stop_tol: float = 1e-12
    vertices: int = 65
    seed: int = 0
    perturbation: float = 0.05
    certify_tol: float = 1e-6

    def __post_init__(self):
        if self.max_sweeps < 1 or self.vertices < 3:
            raise ValueError("need max_sweeps >= 1 and vertices >= 3")
        if not (self.stop_tol > 0 and self.certify_tol > 0 and self.perturbation >= 0):
            raise ValueError("tolerances must be positive")


class Certificate(NamedTuple):
    final_length: float
    endpoint_distance: float
    certified: bool


class ShorteningResult(NamedTuple):
    curve: Polyline
    certificate: Certificate
    sweeps: int
    converged: bool
    history: Tuple[float, ...]


def line_segment(x, y) -> Parametric:
    """Affine segment from ``x`` to ``y`` on ``[0, 1]``; minimal for every norm."""
    return segment(x, y)


def _initial_vertices(prob: GeodesicProblem, cfg: ShorteningConfig) -> np.ndarray:
    x, y = prob.start, prob.end
    if prob.initial is not None:
        V = np.array(prob.metric.admit(prob.initial.points), dtype=float, order="C")
        if len(V) < 3:
            raise MetricError("initial polyline needs at least 3 vertices")
        V[0], V[-1] = x, y
        return V
    n = cfg.vertices
    t = np.linspace(0.0, 1.0, n)[:, None]
    V = (1.0 - t) * x + t * y
    rng = np.random.default_rng(cfg.seed)
    V[1:-1] += cfg.perturbation * np.linalg.norm(y - x) * rng.standard_normal((n - 2, x.size))
    if prob.metric.on_sphere:
        nrm = np.linalg.norm(V[1:-1], axis=1)
        if np.any(nrm < 1e-12):
            raise MetricError("initial chord passes through the origin")
        V[1:-1] /= nrm[:, None]
    V[0], V[-1] = x, y
    return np.ascontiguousarray(V)


def _polyline(V: np.ndarray, lengths: np.ndarray, sphere: bool) -> Polyline:
    params = np.concatenate(([0.0], np.add.accumulate(lengths)))
    if params[-1] == 0.0:
        return Polyline([0.0], V[:1], on_sphere=sphere)
    if np.any(np.diff(params) <= 0.0):
        params = np.linspace(0.0, params[-1], len(V))
    return Polyline(params, V, on_sphere=sphere)


def shorten_polyline(prob: GeodesicProblem, cfg: ShorteningConfig = ShorteningConfig()) -> ShorteningResult:
    """Shorten a polyline between fixed endpoints until a sweep gains less than ``stop_tol``.

    One sweep relaxes odd then even interior vertices to the midpoint of their
    neighbours (normalized on the sphere) and re-spaces all vertices evenly by
    arc length. Endpoints are never touched.
    """
    m = prob.metric
    if m.kind is MetricKind.DISCRETE:
        raise MetricError("the discrete metric has no nonconstant curves to shorten")
    x, y = prob.start, prob.end
    sphere = m.on_sphere
    if np.array_equal(x, y):
        return ShorteningResult(Polyline([0.0], x[None, :], on_sphere=sphere),
                                Certificate(0.0, 0.0, True), 0, True, (0.0,))
    if sphere and np.linalg.norm(x + y) <= 1e-12:
        raise MetricError("antipodal endpoints: the minimizer is not unique")

    # curves in the sphere have the same length under both sphere metrics
    length_metric = Metric.sphere(m.dim) if sphere else m
    V = _initial_vertices(prob, cfg)
    seg = length_metric.chords(V)
    L = float(np.add.accumulate(seg)[-1])
    history = [L]
    converged = False
    sweeps = 0
    for sweeps in range(1, cfg.max_sweeps + 1):
        kernels.relax_half(V, 1, sphere)
        kernels.relax_half(V, 0, sphere)
        V = kernels.respace(V, length_metric.chords(V), sphere)
        seg = length_metric.chords(V)
        L_new = float(np.add.accumulate(seg)[-1])
        history.append(L_new)
        gain = (L - L_new) / L if L > 0 else 0.0
        L = L_new
        if gain < cfg.stop_tol:
            converged = True
            break
    d = distance(m, x, y)
    cert = Certificate(L, d, bool(L <= d * (1.0 + cfg.certify_tol)))
    return ShorteningResult(_polyline(V, seg, sphere), cert, sweeps, converged, tuple(history))


def certify_minimal(c: Curve, m: Metric, tol: float = 1e-9,
                    max_segments: int = DEFAULT_MAX_SEGMENTS) -> bool:
    """True when the curve's length does not exceed its endpoint distance (times ``1 + tol``).

    False does not prove the curve is not minimal: in a space where no curve
    realizes the distance, every curve fails.
    """
    est = estimate_length(c, m, max_segments=max_segments)
    return est.value <= distance(m, c.start, c.end) * (1.0 + tol)


def spherical_chordal_length_agreement(c: Curve, tol: float = 1e-9,
                                       max_segments: int = DEFAULT_MAX_SEGMENTS) -> Tuple[float, float]:
    """Lengths of an on-sphere curve under the chordal and the spherical metric."""
    chordal = estimate_length(c, Metric.chordal_sphere(c.dim), tol, max_segments)
    spherical = estimate_length(c, Metric.sphere(c.dim), tol, max_segments)
    return chordal.value, spherical.value


__all__ = [
    "GeodesicProblem", "ShorteningConfig", "Certificate", "ShorteningResult", "line_segment",
    "shorten_polyline", "certify_minimal", "spherical_chordal_length_agreement",
]
