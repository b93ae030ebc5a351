"""Command line front end.

Exit codes: 0 success (converged / certified / clean), 2 a well-formed run
whose answer is negative (no convergence, no certificate, violations found),
1 bad input.
"""

from __future__ import annotations

import argparse
import os
import re
import sys

import numpy as np

from . import axioms, curves, geodesics, lipschitz
from .metric import MetricError, parse_metric

EXIT_OK, EXIT_INPUT, EXIT_NEGATIVE = 0, 1, 2


def _g(x: float) -> str:
    return f"{x:.15g}"


def _b(flag: bool) -> str:
    return "true" if flag else "false"


class _Output:
    """Writes to ``--out`` when given, else stdout."""

    def __init__(self, path):
        self.path = path
        self.chunks = []

    def write(self, line: str):
        self.chunks.append(line)

    def close(self):
        text = "\n".join(self.chunks) + "\n"
        if self.path:
            with open(self.path, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def _load_curve(source: str, metric_spec: str):
    if re.match(r"^\s*[a-z][a-z-]*\s*\[", source):
        c = curves.parse_builtin(source)
    elif os.path.isfile(source):
        with open(source) as fh:
            c = curves.load_curve(fh.read())
    else:
        raise curves.CurveError(f"curve source {source!r} is neither a builtin curve nor a file")
    m = parse_metric(metric_spec, c.dim)
    if isinstance(c, curves.Polyline) and m.on_sphere and not c.on_sphere:
        c = curves.Polyline(c.params, c.points, on_sphere=True)
    return c, m


def run_length(args) -> int:
    c, m = _load_curve(args.curve, args.metric)
    est = curves.estimate_length(c, m, args.tol, args.max_segments)
    out = _Output(args.out)
    out.write("segments,lambda,converged")
    for k, (segs, lam) in enumerate(est.trace):
        last = k == len(est.trace) - 1
        out.write(f"{segs},{_g(lam)},{_b(est.converged and last)}")
    out.write(f"# length={_g(est.value)} segments={est.segments} converged={_b(est.converged)}")
    if args.integral:
        out.write(f"# integral={_g(curves.integral_length(c, _norm_of(m), args.tol))}")
    out.close()
    return EXIT_OK if est.converged else EXIT_NEGATIVE


def _norm_of(m):
    if not m.is_norm:
        raise MetricError(f"integral length needs a norm metric, not {m.spec}")
    if m.norm is not None:
        return m.norm
    return m.p if m.p is not None else 2.0


def run_reparam(args) -> int:
    c, m = _load_curve(args.curve, args.metric)
    try:
        q = curves.reparametrize_by_arclength(c, m, args.samples, args.tol, args.max_segments)
    except curves.LengthNotConverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    total = q.domain.b
    if total > 0:
        rng = np.random.default_rng(args.seed)
        s = rng.uniform(0.0, total, (args.pairs, 2))
        gap = m.rows(q.evaluate(s[:, 0]), q.evaluate(s[:, 1]))
        bad = gap > np.abs(s[:, 0] - s[:, 1]) * (1.0 + 1e-6) + 1e-15
        if np.any(bad):
            i = int(np.argmax(bad))
            print(f"error: reparametrized curve is not 1-Lipschitz at s={_g(s[i, 0])}, "
                  f"s'={_g(s[i, 1])}", file=sys.stderr)
            return EXIT_NEGATIVE
    out = _Output(args.out)
    out.write(curves.dump_curve(q))
    out.close()
    return EXIT_OK


def _infer_dim(tokens, default=3):
    for t in tokens:
        if t and not re.fullmatch(r"-?e\d+", t.strip()):
            return curves.parse_point(t).size
    return default


def run_geodesic(args) -> int:
    dim = args.dim or _infer_dim([args.start, args.end])
    m = parse_metric(args.metric, dim)
    x = curves.parse_point(args.start, dim)
    y = curves.parse_point(args.end, dim)
    initial = None
    if args.initial:
        with open(args.initial) as fh:
            initial = curves.load_curve(fh.read(), on_sphere=m.on_sphere)
    prob = geodesics.GeodesicProblem(m, x, y, initial)
    cfg = geodesics.ShorteningConfig(max_sweeps=args.max_sweeps, vertices=args.vertices,
                                     seed=args.seed)
    res = geodesics.shorten_polyline(prob, cfg)
    cert = res.certificate
    doc = curves.dump_curve(res.curve)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(doc + "\n")
    else:
        print(doc)
    print("final_length,endpoint_distance,certified")
    print(f"{_g(cert.final_length)},{_g(cert.endpoint_distance)},{_b(cert.certified)}")
    return EXIT_OK if cert.certified else EXIT_NEGATIVE


def _emit_report(report, args) -> int:
    out = _Output(args.out)
    for line in report.lines():
        out.write(line)
    out.write(f"# ok={_b(report.ok)}")
    out.close()
    return EXIT_OK if report.ok else EXIT_NEGATIVE


def run_check(args) -> int:
    if args.what == "metric":
        with open(args.matrix) as fh:
            D = axioms.DistanceMatrix.from_csv(fh.read())
        report = axioms.check_metric_axioms(D, tol=args.check_tol, seed=args.seed)
    elif args.what == "norm":
        name = args.name.strip().lower()
        if name == "euclidean":
            p = 2.0
        elif name.startswith("pnorm:"):
            p = parse_metric(name, 1).p
        else:
            raise MetricError(f"unknown norm name {args.name!r}")
        vectors, scalars = axioms.standard_norm_sample(args.dim, args.samples, args.seed)
        report = axioms.check_norm_axioms(p, vectors, scalars, args.check_tol, seed=args.seed)
    else:
        m = parse_metric("sphere", args.dim)
        X, Y = lipschitz.sample_pairs(m, args.pairs, args.seed)
        report = axioms.check_comparison_bounds(X, Y, args.check_tol)
    return _emit_report(report, args)


def run_lipschitz(args) -> int:
    dim = args.dim or _map_dim(args.map)
    m = parse_metric(args.metric, dim)
    f = lipschitz.parse_map(args.map, m)
    pairs = lipschitz.sample_pairs(m, args.pairs, args.seed)
    out = _Output(args.out)
    if args.action == "estimate":
        est = lipschitz.estimate_lipschitz_constant(f, pairs)
        out.write(f"estimate,{_g(est)}")
        claimed = "unknown" if f.claimed_C is None else _g(f.claimed_C)
        out.write(f"claimed,{claimed}")
        out.close()
        return EXIT_OK
    C = f.claimed_C if args.constant is None else args.constant
    bad = lipschitz.verify_lipschitz(f, C, pairs)
    out.write("pair,image_distance,bound")
    for v in bad[:100]:
        out.write(f"{v.index},{_g(v.image_distance)},{_g(v.bound)}")
    out.write(f"# constant={_g(C)} pairs={args.pairs} violations={len(bad)}")
    out.close()
    return EXIT_OK if not bad else EXIT_NEGATIVE


def _map_dim(spec: str) -> int:
    _, _, arg = spec.partition(":")
    toks = re.split(r"[;@]", arg) if spec.startswith(("dist-to", "project")) else []
    return _infer_dim(toks, default=2)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=curves.DEFAULT_TOL)
    common.add_argument("--max-segments", type=int, default=curves.DEFAULT_MAX_SEGMENTS)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="write the main output here instead of stdout")

    parser = argparse.ArgumentParser(prog="metriclen", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("length", parents=[common], help="length by partition refinement")
    p.add_argument("--curve", required=True, help="builtin like circle[0,2pi] or a curve JSON file")
    p.add_argument("--metric", default="euclidean")
    p.add_argument("--integral", action="store_true", help="also integrate the norm of the derivative")
    p.set_defaults(func=run_length)

    p = sub.add_parser("reparam", parents=[common], help="reparametrize by arc length")
    p.add_argument("--curve", required=True)
    p.add_argument("--metric", default="euclidean")
    p.add_argument("--samples", type=int, default=1025)
    p.add_argument("--pairs", type=int, default=10_000, help="pairs for the 1-Lipschitz check")
    p.set_defaults(func=run_reparam)

    p = sub.add_parser("geodesic", parents=[common], help="shorten a polyline between two points")
    p.add_argument("--metric", required=True)
    p.add_argument("--from", dest="start", required=True)
    p.add_argument("--to", dest="end", required=True)
    p.add_argument("--dim", type=int, default=None, help="needed for e<k> points; default 3")
    p.add_argument("--vertices", type=int, default=65)
    p.add_argument("--max-sweeps", type=int, default=10_000)
    p.add_argument("--initial", default=None, help="initial polyline (curve JSON)")
    p.set_defaults(func=run_geodesic)

    p = sub.add_parser("check", help="axiom checks")
    csub = p.add_subparsers(dest="what", required=True)
    q = csub.add_parser("metric", parents=[common])
    q.add_argument("--matrix", required=True, help="CSV distance matrix, no header")
    q = csub.add_parser("norm", parents=[common])
    q.add_argument("--name", required=True, help="pnorm:<p> or euclidean")
    q.add_argument("--dim", type=int, default=4)
    q.add_argument("--samples", type=int, default=64)
    q = csub.add_parser("sphere-bounds", parents=[common])
    q.add_argument("--dim", type=int, required=True)
    q.add_argument("--pairs", type=int, default=10_000)
    for q in csub.choices.values():
        q.add_argument("--check-tol", type=float, default=1e-12)
    p.set_defaults(func=run_check)

    p = sub.add_parser("lipschitz", help="sampled Lipschitz constants")
    lsub = p.add_subparsers(dest="action", required=True)
    for action in ("estimate", "verify"):
        q = lsub.add_parser(action, parents=[common])
        q.add_argument("--map", required=True, help="scale:<c>, dist-to:<point>, project:<v1>;<v2>[@<base>]")
        q.add_argument("--metric", default="euclidean")
        q.add_argument("--dim", type=int, default=None)
        q.add_argument("--pairs", type=int, default=10_000)
        if action == "verify":
            q.add_argument("--constant", type=float, default=None)
    p.set_defaults(func=run_lipschitz)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "tol", 1.0) <= 0 or getattr(args, "max_segments", 2) < 2:
        print("error: --tol must be positive and --max-segments at least 2", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (curves.CurveError, MetricError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
