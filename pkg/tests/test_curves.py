import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize

from metriclen.curves import (CurveError, Interval, LengthNotConverged, MonotoneMap, Parametric,
                              Partition, Polyline, arclength_function, circle, compose_with_map,
                              curve_from_dict, dump_curve, estimate_length, graph_tcos, helix,
                              integral_length, load_curve, parse_builtin, parse_number, parse_point,
                              partition_sum, real_function, refine, reparametrize_by_arclength,
                              reparametrize_domain, sample_polyline, segment)
from metriclen.lipschitz import LipschitzMap, constant, identity, scaling
from metriclen.metric import INF, Metric, MetricError, norm_eval, parse_metric

E2 = Metric.euclidean(2)
E3 = Metric.euclidean(3)
TOL = 1e-9


def naive_sum(c, m, knots):
    pts = c.evaluate(knots)
    return sum(m.distance(pts[i], pts[i + 1]) for i in range(len(pts) - 1))


def random_polyline(rng, dim=2, k=None):
    k = k or int(rng.integers(2, 12))
    params = np.sort(rng.uniform(0, 3, k))
    params[0], params[-1] = 0.0, 3.0
    params = np.unique(params)
    return Polyline(params, rng.uniform(-1, 1, (params.size, dim)))


def random_partition(rng, a, b):
    inner = np.unique(rng.uniform(a, b, int(rng.integers(0, 20))))
    inner = inner[(inner > a) & (inner < b)]
    return Partition(np.concatenate(([a], inner, [b])))


# partitions

def test_partition_rejects_bad_knots():
    with pytest.raises(CurveError):
        Partition([0.0])
    with pytest.raises(CurveError):
        Partition([0.0, 0.5, 0.5, 1.0])
    with pytest.raises(CurveError):
        Partition([1.0, 0.0])


def test_interval_rejects_reversed():
    with pytest.raises(CurveError):
        Interval(1.0, 0.0)


def test_refine_examples():
    np.testing.assert_array_equal(refine(Partition([0, 1])).knots, [0, 0.5, 1])
    np.testing.assert_array_equal(refine(Partition([0, 0.5, 1])).knots, [0, 0.25, 0.5, 0.75, 1])


def test_refine_doubles_and_refines():
    P = Partition([0.0, 0.3, 1.7, 2.0])
    R = refine(P)
    assert R.segments == 2 * P.segments
    assert R.refines(P) and not P.refines(R)


# partition sums

def test_partition_sum_identity_line():
    c = real_function(lambda t: t, 0.0, 1.0)
    assert partition_sum(c, Metric.euclidean(1), Partition([0, 0.5, 1])) == 1.0


def test_partition_sum_half_circle_two_chords():
    c = circle(0.0, math.pi)
    val = partition_sum(c, E2, Partition([0.0, math.pi / 2, math.pi]))
    assert val == pytest.approx(2 * math.sqrt(2), abs=1e-15)


def test_partition_sum_single_segment_is_endpoint_distance():
    c = helix(0.0, 5.0)
    assert partition_sum(c, E3, Partition([0.0, 5.0])) == E3.distance(c.start, c.end)


def test_partition_sum_mismatch():
    with pytest.raises(CurveError):
        partition_sum(circle(0, 1), E2, Partition([0, 0.5]))
    with pytest.raises(MetricError):
        partition_sum(circle(0, 1), E3, Partition([0, 1]))


def test_partition_sum_matches_naive_loop():
    rng = np.random.default_rng(0)
    for spec in ("euclidean", "pnorm:1", "pnorm:3", "pnorm:inf", "discrete"):
        m = parse_metric(spec, 2)
        c = random_polyline(rng)
        P = random_partition(rng, 0.0, 3.0)
        assert partition_sum(c, m, P) == pytest.approx(naive_sum(c, m, P.knots), rel=1e-14)


def test_refinement_monotone_seeded():
    rng = np.random.default_rng(1)
    for _ in range(200):
        c = random_polyline(rng, dim=3)
        P = random_partition(rng, 0.0, 3.0)
        assert partition_sum(c, E3, P) <= partition_sum(c, E3, refine(P)) + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.01, 3.0 - 0.01), min_size=0, max_size=15),
       st.lists(st.floats(0.01, 3.0 - 0.01), min_size=1, max_size=15),
       st.integers(0, 2**32 - 1))
def test_adding_knots_never_decreases(knots, extra, seed):
    c = random_polyline(np.random.default_rng(seed), dim=2)
    P = Partition(np.unique([0.0, 3.0, *knots]))
    Q = Partition(np.unique([0.0, 3.0, *knots, *extra]))
    assert Q.refines(P)
    assert partition_sum(c, E2, P) <= partition_sum(c, E2, Q) + 1e-12


# estimate_length

def test_circle_length():
    est = estimate_length(circle(), E2)
    assert est.converged and est.lower_bound
    assert est.value == pytest.approx(2 * math.pi, abs=1e-6)
    assert est.value <= 2 * math.pi


def test_trace_is_nondecreasing_and_doubles():
    est = estimate_length(circle(), E2)
    segs = [s for s, _ in est.trace]
    lams = [v for _, v in est.trace]
    assert segs == [2 ** k for k in range(len(segs))]
    assert all(b >= a - 1e-13 for a, b in zip(lams, lams[1:]))
    assert est.segments == segs[-1]


def test_monotone_real_function_total_variation():
    est = estimate_length(real_function(lambda t: t ** 3, 0.0, 2.0), Metric.euclidean(1))
    assert est.value == pytest.approx(8.0, abs=1e-9)
    assert est.converged


def test_constant_curve_has_zero_length():
    c = Parametric(Interval(0, 1), lambda t: np.ones((len(t), 2)), 2)
    est = estimate_length(c, E2)
    assert est.value == 0.0 and est.converged


def test_degenerate_domain():
    assert estimate_length(circle(1.0, 1.0), E2).value == 0.0


def test_non_bv_fixture():
    est = estimate_length(graph_tcos(), Metric.euclidean(1))
    assert not est.converged
    assert est.segments == 2 ** 20
    lam = dict(est.trace)
    assert lam[2 ** 16] - lam[2 ** 10] > 1.0


def test_cap_gives_lower_bound_not_error():
    est = estimate_length(circle(), E2, max_segments=8)
    assert not est.converged and est.segments == 8
    assert est.value < 2 * math.pi


def test_bad_arguments():
    with pytest.raises(ValueError):
        estimate_length(circle(), E2, tol=0.0)
    with pytest.raises(ValueError):
        estimate_length(circle(), E2, max_segments=1)


def test_polyline_corners_are_never_cut():
    # knots off the dyadic grid would be skipped by a plain uniform grid
    c = Polyline([0.0, 0.3, 1.0], [[0, 0], [1, 1], [2, 0]])
    est = estimate_length(c, E2)
    assert est.value == pytest.approx(2 * math.sqrt(2), rel=1e-15)


def test_endpoint_and_diameter_bounds():
    rng = np.random.default_rng(2)
    for _ in range(30):
        c = random_polyline(rng)
        L = estimate_length(c, E2).value
        assert E2.distance(c.start, c.end) <= L + 1e-12
        pts = c.evaluate(np.linspace(0, 3, 400))
        diam = max(np.max(np.linalg.norm(pts - p, axis=1)) for p in pts)
        assert diam <= L + 1e-12


def test_lipschitz_curve_length_bound():
    rng = np.random.default_rng(3)
    for _ in range(30):
        c = random_polyline(rng)
        pts, t = c.points, c.params
        C = max(np.linalg.norm(pts[i + 1] - pts[i]) / (t[i + 1] - t[i]) for i in range(len(t) - 1))
        assert estimate_length(c, E2).value <= C * 3.0 + 1e-12


def test_polyline_length_equals_chord_sum_oracle():
    rng = np.random.default_rng(4)
    for _ in range(20):
        c = random_polyline(rng, dim=4)
        oracle = sum(math.dist(c.points[i], c.points[i + 1]) for i in range(len(c.points) - 1))
        assert estimate_length(c, Metric.euclidean(4)).value == pytest.approx(oracle, rel=1e-13)


def test_length_under_sup_and_l1_of_diagonal_segment():
    c = segment([0, 0], [1, 1])
    assert estimate_length(c, Metric.pnorm(1, 2)).value == pytest.approx(2.0, abs=1e-15)
    assert estimate_length(c, Metric.pnorm(INF, 2)).value == pytest.approx(1.0, abs=1e-15)


def test_discrete_metric_length_diverges():
    est = estimate_length(segment([0.0], [1.0]), Metric.discrete(1), max_segments=2 ** 10)
    assert est.value == 2 ** 10 and not est.converged


# arc length and additivity

@pytest.mark.parametrize("r", [math.pi / 4, math.pi / 2, math.pi])
def test_unit_speed_arclength(r):
    assert arclength_function(circle(), E2, r) == pytest.approx(r, abs=1e-6)


def test_arclength_endpoints_and_range():
    c = circle(0.0, math.pi)
    assert arclength_function(c, E2, 0.0) == 0.0
    assert arclength_function(c, E2, math.pi) == pytest.approx(math.pi, abs=1e-6)
    with pytest.raises(CurveError):
        arclength_function(c, E2, 4.0)


def test_arclength_monotone_on_grid():
    c = graph_tcos(0.05, 1.0)
    rs = np.linspace(0.05, 1.0, 100)
    vals = [arclength_function(c, Metric.euclidean(1), r) for r in rs]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


FIXTURES = [
    ("circle", circle(), E2),
    ("helix", helix(), E3),
    ("cubic", real_function(lambda t: t ** 3, 0.0, 2.0), Metric.euclidean(1)),
    ("segment", segment([0, 0, 0], [1, -2, 2]), E3),
]


@pytest.mark.parametrize("name, c, m", FIXTURES, ids=[f[0] for f in FIXTURES])
def test_additivity(name, c, m):
    rng = np.random.default_rng(5)
    a, b = c.domain.a, c.domain.b
    whole = estimate_length(c, m, TOL).value
    for r in rng.uniform(a, b, 10):
        left = estimate_length(c.restrict(a, r), m, TOL).value
        right = estimate_length(c.restrict(r, b), m, TOL).value
        assert abs(left + right - whole) <= 3 * TOL * whole


def tcos_variation(lo, hi):
    """Exact total variation of t cos(pi/t): sum |jumps| between critical points."""
    def f(t):
        return t * math.cos(math.pi / t)

    def df(t):
        return math.cos(math.pi / t) + math.pi / t * math.sin(math.pi / t)

    grid = np.linspace(lo, hi, 20_001)
    crit = [optimize.brentq(df, u, v, xtol=1e-15)
            for u, v in zip(grid[:-1], grid[1:]) if df(u) * df(v) < 0]
    knots = [lo, *crit, hi]
    return sum(abs(f(v) - f(u)) for u, v in zip(knots[:-1], knots[1:]))


def test_aliased_stop_is_still_a_lower_bound():
    # dyadic samples of an oscillating tail can stall twice in a row; the
    # value may then be far from the length but never above it
    c = graph_tcos(0.1, 1.0)
    m = Metric.euclidean(1)
    rng = np.random.default_rng(5)
    for r in rng.uniform(0.1, 1.0, 10):
        for lo, hi in ((0.1, r), (r, 1.0)):
            assert estimate_length(c.restrict(lo, hi), m).value <= tcos_variation(lo, hi) + 1e-12


# integral length

def quad_oracle(c, p=2.0):
    def f(u):
        return norm_eval(p, c.derivative([u])[0])
    return integrate.quad(f, c.domain.a, c.domain.b, epsabs=1e-13, epsrel=1e-13, limit=500)[0]


def test_integral_circle():
    assert integral_length(circle(0.0, 2.5)) == pytest.approx(2.5, abs=1e-12)


def test_integral_helix_analytic_and_quad():
    val = integral_length(helix())
    assert val == pytest.approx(2 * math.pi * math.sqrt(2), abs=1e-10)
    assert val == pytest.approx(quad_oracle(helix()), abs=1e-10)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, INF])
def test_integral_segment_is_norm_of_difference(p):
    x, y = np.array([1.0, -2.0, 0.5]), np.array([3.0, 1.0, -1.0])
    assert integral_length(segment(x, y), p) == pytest.approx(norm_eval(p, y - x), rel=1e-13)


@pytest.mark.parametrize("p", [1.0, 3.0, INF])
def test_integral_matches_quad_oracle_in_pnorms(p):
    c = helix(0.0, 4.0)
    assert integral_length(c, p) == pytest.approx(quad_oracle(c, p), rel=1e-9)


@pytest.mark.parametrize("c, m", [(circle(), E2), (helix(), E3), (segment([0, 1], [2, 5]), E2)],
                         ids=["circle", "helix", "segment"])
def test_integral_agrees_with_partition_estimate(c, m):
    assert abs(integral_length(c) - estimate_length(c, m).value) <= 10 * (1e-10 + TOL) * 2 * math.pi * 2


def test_integral_with_custom_norm():
    def weighted(v):
        return abs(v[0]) + 2 * abs(v[1])
    assert integral_length(segment([0, 0], [1, 1]), weighted) == pytest.approx(3.0, rel=1e-14)


def test_integral_needs_derivative():
    c = Parametric(Interval(0, 1), lambda t: np.column_stack((t, t)), 2)
    with pytest.raises(CurveError):
        integral_length(c)


# reparametrization by arc length

def test_reparam_unit_speed_is_idempotent():
    c = circle(0.0, math.pi)
    q = reparametrize_by_arclength(c, E2, samples=257)
    assert q.domain.b == pytest.approx(math.pi, abs=1e-6)
    s = q.params
    np.testing.assert_allclose(q.evaluate(s), c.evaluate(np.clip(s, 0, math.pi)), atol=1e-6)


def test_reparam_double_speed_closed_form():
    c = circle(0.0, math.pi, speed=2.0)
    q = reparametrize_by_arclength(c, E2, samples=129)
    assert q.domain.b == pytest.approx(2 * math.pi, abs=1e-6)
    s = q.params
    oracle = np.column_stack((np.cos(s), np.sin(s)))
    np.testing.assert_allclose(q.points, oracle, atol=1e-6)


def test_reparam_collapses_plateaus():
    # stands still on [1, 2]
    c = Polyline([0.0, 1.0, 2.0, 3.0], [[0, 0], [1, 0], [1, 0], [1, 1]])
    q = reparametrize_by_arclength(c, E2, samples=31)
    assert q.domain.b == pytest.approx(2.0, abs=1e-12)
    assert np.all(np.diff(q.params) > 0)
    assert np.sum(np.all(q.points == [1.0, 0.0], axis=1)) == 1


def test_reparam_is_one_lipschitz():
    q = reparametrize_by_arclength(helix(), E3, samples=513)
    rng = np.random.default_rng(6)
    s = rng.uniform(0, q.domain.b, (10_000, 2))
    d = E3.rows(q.evaluate(s[:, 0]), q.evaluate(s[:, 1]))
    assert np.all(d <= np.abs(s[:, 0] - s[:, 1]) * (1 + 1e-6))


def test_reparam_refuses_non_bv():
    with pytest.raises(LengthNotConverged):
        reparametrize_by_arclength(graph_tcos(), Metric.euclidean(1), samples=3,
                                   max_segments=2 ** 12)


# composition and domain reparametrization

def test_compose_identity_scaling_constant():
    c = helix()
    L = estimate_length(c, E3).value
    assert estimate_length(compose_with_map(identity(E3), c), E3).value == pytest.approx(L, rel=1e-15)
    # both sides are tol-accurate estimates that may stop at different doublings
    assert estimate_length(compose_with_map(scaling(3.0, E3), c), E3).value == pytest.approx(3 * L, rel=TOL)
    assert estimate_length(compose_with_map(constant([1, 2, 3], E3, E3), c), E3).value == 0.0


def test_compose_dimension_mismatch():
    with pytest.raises(MetricError):
        compose_with_map(identity(E3), circle())


def test_linear_map_length_bound():
    rng = np.random.default_rng(7)
    c = helix()
    L = estimate_length(c, E3).value
    for _ in range(10):
        A = rng.standard_normal((3, 3))
        C = np.linalg.norm(A, 2)
        f = LipschitzMap(lambda X, A=A: X @ A.T, E3, E3, C, vectorized=True)
        assert estimate_length(compose_with_map(f, c), E3).value <= C * L * (1 + 1e-9)


def test_reparametrize_domain_identity_and_square():
    c = circle(0.0, math.pi)
    same = reparametrize_domain(c, MonotoneMap([0.0, math.pi], [0.0, math.pi]))
    np.testing.assert_allclose(same.evaluate([0.3, 2.0]), c.evaluate([0.3, 2.0]))
    xs = np.linspace(0, 1, 201)
    sq = reparametrize_domain(c, MonotoneMap(xs, math.pi * xs ** 2))
    assert estimate_length(sq, E2).value == pytest.approx(math.pi, abs=1e-6)


def test_reparametrize_domain_with_flat_piece():
    c = circle(0.0, math.pi)
    phi = MonotoneMap([0, 1, 2, 3], [0, 1, 1, math.pi])
    assert estimate_length(reparametrize_domain(c, phi), E2).value == pytest.approx(math.pi, abs=1e-6)


def test_reparametrize_domain_chain_rule():
    c = circle(0.0, math.pi)
    phi = MonotoneMap([0.0, 1.0, 2.0], [0.0, 1.0, math.pi])
    q = reparametrize_domain(c, phi)
    assert integral_length(q) == pytest.approx(math.pi, abs=1e-10)


def test_reparametrize_domain_rejects_bad_tables():
    c = circle(0.0, 1.0)
    with pytest.raises(CurveError):
        MonotoneMap([0, 1, 2], [0, 0.7, 0.5])
    with pytest.raises(CurveError):
        reparametrize_domain(c, MonotoneMap([0, 1], [0, 0.9]))


def test_non_monotone_surjection_only_adds_length():
    c = circle(0.0, math.pi)
    xs = np.linspace(0, 1, 5)
    ys = np.array([0.0, 2.0, 1.0, 2.5, math.pi])

    def rule(t):
        return c.evaluate(np.interp(t, xs, ys))
    back_and_forth = Parametric(Interval(0, 1), rule, 2)
    assert estimate_length(back_and_forth, E2).value >= estimate_length(c, E2).value - 1e-9


# polylines

def test_polyline_validation():
    with pytest.raises(CurveError):
        Polyline([0, 0], [[0, 0], [1, 1]])
    with pytest.raises(CurveError):
        Polyline([0, 1], [[0, 0]])
    with pytest.raises(CurveError):
        Polyline([0, 1], [[0, 0], [float("nan"), 1]])


def test_polyline_interpolates_and_checks_domain():
    c = Polyline([0, 2], [[0, 0], [2, 4]])
    np.testing.assert_allclose(c(0.5), [0.5, 1.0])
    with pytest.raises(CurveError):
        c(2.5)


def test_sphere_polyline_stays_on_sphere():
    c = Polyline([0, 1], [[1, 0, 0], [0, 1, 0]], on_sphere=True)
    pts = c.evaluate(np.linspace(0, 1, 11))
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-15)


def test_sample_polyline_length_converges_from_below():
    prev = 0.0
    for n in (4, 16, 64, 256):
        L = estimate_length(sample_polyline(circle(), n), E2).value
        assert prev <= L < 2 * math.pi
        prev = L


# parsing and files

@pytest.mark.parametrize("tok, val", [("2", 2.0), ("pi", math.pi), ("2pi", 2 * math.pi),
                                      ("0.5*pi", 0.5 * math.pi), ("-1e-3", -1e-3)])
def test_parse_number(tok, val):
    assert parse_number(tok) == val


@pytest.mark.parametrize("tok", ["", "x", "pi pi", "1..2"])
def test_parse_number_errors(tok):
    with pytest.raises(CurveError):
        parse_number(tok)


def test_parse_point():
    np.testing.assert_array_equal(parse_point("e2", 3), [0, 1, 0])
    np.testing.assert_array_equal(parse_point("-e1", 2), [-1, 0])
    np.testing.assert_array_equal(parse_point("(1, 2.5)"), [1, 2.5])
    with pytest.raises(CurveError):
        parse_point("e4", 3)
    with pytest.raises(CurveError):
        parse_point("1,2", 3)


def test_parse_builtins():
    assert parse_builtin("circle[0,2pi]").domain.b == 2 * math.pi
    assert parse_builtin("helix[0,1]").dim == 3
    np.testing.assert_array_equal(parse_builtin("segment[0,0;1,1]").end, [1, 1])
    assert parse_builtin("graph-tcos[0,1]").dim == 1
    for bad in ("circle", "circle[0]", "spiral[0,1]", "segment[0,0]", "circle[1,0]"):
        with pytest.raises(CurveError):
            parse_builtin(bad)


def test_curve_json_round_trip():
    c = Polyline([0.0, 0.5, 1.0], [[0.0, 0.0], [1 / 3, 0.5], [1.0, 1.0]])
    back = load_curve(dump_curve(c))
    np.testing.assert_allclose(back.params, c.params, rtol=1e-15)
    np.testing.assert_allclose(back.points, c.points, rtol=1e-14)


@pytest.mark.parametrize("doc, field", [
    ({"params": [0, 1], "points": [[0], [1]]}, "dim"),
    ({"dim": 0, "params": [0, 1], "points": [[0], [1]]}, "dim"),
    ({"dim": 1, "params": [0, "x"], "points": [[0], [1]]}, "params"),
    ({"dim": 2, "params": [0, 1], "points": [[0], [1]]}, "points"),
    ({"dim": 1, "params": [1, 0], "points": [[0], [1]]}, "params"),
])
def test_curve_json_errors_name_field(doc, field):
    with pytest.raises(CurveError, match=field):
        curve_from_dict(doc)


def test_load_curve_bad_json():
    with pytest.raises(CurveError):
        load_curve("{not json")


def test_dump_is_json_with_expected_keys():
    doc = json.loads(dump_curve(Polyline([0, 1], [[1, 2, 3], [4, 5, 6]])))
    assert doc == {"dim": 3, "params": [0.0, 1.0], "points": [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]}


def test_min_segments_guards_coarse_aliasing():
    c = real_function(lambda t: np.sin(8 * np.pi * t), 0.0, 1.0)
    fooled = estimate_length(c, Metric.euclidean(1), min_segments=1)
    assert fooled.converged and fooled.value < 1e-15
    assert estimate_length(c, Metric.euclidean(1)).value == pytest.approx(16.0, abs=1e-9)
