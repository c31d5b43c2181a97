"""Command-line interface: seed, solve, sweep, stability, trace, verify.

Exit codes: 0 success, 1 failed continuation or verification, 2 bad usage.
"""

import argparse
import sys

import numpy as np

from . import catalog as cat
from .errors import CatalogFormatError, DsymorbError
from .integrator import IntegratorConfig
from .seeds import CASES, Regime, build_seed, case_from_label, resonance_params, spec_from_cos2i
from .shooting import quarter_bundle
from .solver import SolverConfig
from .stability import MonodromyResult

_REGIMES = [r.value for r in Regime]


def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {value}")
    return value


def _case(text):
    try:
        return case_from_label(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _add_spec_flags(p, with_case=True, require_kj=True):
    p.add_argument("--regime", choices=_REGIMES, required=True)
    p.add_argument("--mu", type=float, default=0.0,
                   help="mass ratio (ignored for hill-lunar)")
    p.add_argument("--k", type=_nonneg_int, required=require_kj, default=0)
    p.add_argument("--j", type=_nonneg_int, required=require_kj, default=0)
    if with_case:
        p.add_argument("--case", type=_case, required=True,
                       help="one of " + " ".join(c.flag for c in CASES))
    p.add_argument("--cos2i", type=float, default=None,
                   help="cos^2 of the seed inclination "
                        "(default 1/3 comet, 1/2 Hill regimes)")


def _add_solver_flags(p):
    p.add_argument("--tol", type=float, default=1e-10,
                   help="residual infinity-norm tolerance")
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--rel-tol", type=float, default=1e-13)
    p.add_argument("--abs-tol", type=float, default=1e-14)
    p.add_argument("--t-max-factor", type=float, default=3.0,
                   help="integration horizon as a multiple of T0/4")


def _spec_from_args(parser, args):
    try:
        return spec_from_cos2i(args.regime, args.k, args.j, args.case,
                               mu=args.mu, cos2i=args.cos2i)
    except ValueError as exc:
        parser.error(str(exc))


def _configs_from_args(args):
    integ = IntegratorConfig(rel_tol=args.rel_tol, abs_tol=args.abs_tol)
    solver = SolverConfig(tol_inf=args.tol, max_iter=args.max_iter)
    return integ, solver


def _print_record(rec):
    print(f"regime={rec.regime} mu={rec.mu:.8g} cos2i={rec.cos2i:.8g} "
          f"k={rec.k} j={rec.j} case={rec.case}")
    print(f"  x = ({rec.x1:.17g}, {rec.x2:.17g}, {rec.x3:.17g})")
    print(f"  t_quarter = {rec.t_quarter:.17g}   residual = {rec.residual:.3e}")
    if np.isfinite(rec.rho):
        mods = ", ".join(f"{abs(m):.6f}" for m in rec.multipliers)
        print(f"  |multipliers| = [{mods}]")
        print(f"  rho = {rec.rho:.6f}   class = {rec.classification} "
              f"  iters = {rec.iters}")
    else:
        print(f"  class = {rec.classification}   iters = {rec.iters}")


def _append_record(rec, path, as_json):
    records = []
    try:
        records = cat.read_catalog(path)
    except FileNotFoundError:
        pass
    records.append(rec)
    cat.write_catalog(records, path, fmt="json" if as_json else "csv")


def cmd_seed(parser, args):
    spec = _spec_from_args(parser, args)
    par = resonance_params(spec)
    state, t0q, target = build_seed(spec)
    print(f"a = {par.a:.17g}  n = {par.n:.17g}  epsilon = {par.epsilon:.17g}")
    print(f"T0/4 = {t0q:.17g}  crossing target = {target} plane passings "
          f"(start included)")
    y = state.as_array()
    print("seed state: " + " ".join(f"{v:.17g}" for v in y))
    return 0


def cmd_solve(parser, args):
    integ, solver_cfg = _configs_from_args(args)
    if args.axial_seed is not None:
        try:
            comps = [float(tok) for tok in args.axial_seed.split(",")]
            if len(comps) != 6:
                raise ValueError("need 6 comma-separated components")
        except ValueError as exc:
            parser.error(f"--axial-seed: {exc}")
        if args.t0 is None:
            parser.error("--axial-seed needs --t0 (approximate full period)")
        try:
            rec = cat.solve_axial_case(args.mu, comps, args.t0, integ=integ,
                                       solver_cfg=solver_cfg,
                                       t_max_factor=args.t_max_factor)
        except DsymorbError as exc:
            print(f"continuation failed: {exc}", file=sys.stderr)
            return 1
    else:
        if args.case is None:
            parser.error("--case is required (or use --axial-seed)")
        spec = _spec_from_args(parser, args)
        rec = cat.solve_case(spec, integ=integ, solver_cfg=solver_cfg,
                             t_max_factor=args.t_max_factor,
                             time_budget=args.budget)
    _print_record(rec)
    if args.catalog:
        _append_record(rec, args.catalog, args.json)
    if rec.classification.startswith("Failed") or not (
            rec.converged or rec.classification == "PlanarAxial"):
        return 1
    return 0


def cmd_sweep(parser, args):
    cases = [c.strip() for c in args.cases.split(",") if c.strip()]
    if not cases:
        parser.error("--cases must name at least one case (or 'all')")
    if cases == ["all"]:
        cases = [c.flag for c in CASES]
    else:
        for c in cases:
            _case(c)
    try:
        sweep = cat.SweepSpec(
            regime=Regime(args.regime), ks=tuple(args.k), js=tuple(args.j),
            cases=tuple(cases), mu=args.mu, cos2i=args.cos2i,
            parallelism=args.parallel, time_budget=args.budget,
            t_max_factor=args.t_max_factor)
    except ValueError as exc:
        parser.error(str(exc))

    written = []
    def sink(rec):
        written.append(rec)
        cat.write_catalog(written, args.out, fmt="json" if args.json else "csv")

    records = cat.run_sweep(sweep, on_record=sink)
    summary = cat.sweep_summary(records)
    print(f"attempted {summary['attempted']}  converged {summary['converged']}"
          f"  failed {summary['failed']}  collision {summary['collision']}")
    print(f"catalog written to {args.out}")
    return 0


def _load_record(parser, args):
    try:
        records = cat.read_catalog(args.catalog)
    except (CatalogFormatError, FileNotFoundError) as exc:
        parser.error(str(exc))
    if not records:
        parser.error(f"catalog {args.catalog} is empty")
    idx = args.row
    if idx < 0 or idx >= len(records):
        parser.error(f"row {idx} out of range (0..{len(records) - 1})")
    return records[idx]


def cmd_stability(parser, args):
    rec = _load_record(parser, args)
    if rec.case == cat.AXIAL_CASE:
        parser.error("stability recomputation expects a subplane record")
    problem, _ = cat.record_problem(rec)
    _, bundle, _ = quarter_bundle(problem, rec.unknowns())
    mono = MonodromyResult.from_quarter(bundle.Z, problem.plane)
    for m in mono.multipliers:
        print(f"multiplier {m.real:+.15g} {m.imag:+.15g}i  |.| = {abs(m):.15g}")
    note = " (marginal)" if mono.marginal else ""
    print(f"rho = {mono.rho:.17g}  trace = {mono.trace:.17g}")
    print(f"classification: {mono.classification.value}{note}")
    return 0


def cmd_trace(parser, args):
    rec = _load_record(parser, args)
    try:
        cat.write_trace(rec, args.samples, args.out)
    except (DsymorbError, ValueError) as exc:
        print(f"trace failed: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.samples} samples over one period to {args.out}")
    return 0


def cmd_verify(parser, args):
    rec = _load_record(parser, args)
    report = cat.verify_record(rec, t_max_factor=args.t_max_factor)
    print(f"residual (all three conditions): {report['residual_all']:.3e}")
    print(f"residual (two defects only):     {report['residual_defects']:.3e}")
    print(f"t_quarter re-detected: {report['t_quarter']:.17g} "
          f"(change {report['t_quarter_change']:.3e})")
    print("verified OK" if report["ok"] else "verification FAILED")
    return 0 if report["ok"] else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dsymorb",
        description="Doubly-symmetric periodic orbits of the CRTBP and "
                    "Hill's lunar problem")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("seed", help="print the approximate initial values")
    _add_spec_flags(p)
    p.set_defaults(func=cmd_seed)

    p = sub.add_parser("solve", help="continue one seed to a periodic orbit")
    _add_spec_flags(p, with_case=False, require_kj=False)
    p.add_argument("--case", type=_case, default=None,
                   help="one of " + " ".join(c.flag for c in CASES))
    p.add_argument("--axial-seed", default=None,
                   help="planar axial seed '0,y,0,xdot,0,0' (equal masses)")
    p.add_argument("--t0", type=float, default=None,
                   help="approximate full period for --axial-seed")
    p.add_argument("--budget", type=float, default=None,
                   help="wall-clock budget in seconds")
    p.add_argument("--catalog", default=None, help="append the record here")
    p.add_argument("--json", action="store_true",
                   help="catalog in JSON instead of CSV")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="run a (k, j, case) grid")
    p.add_argument("--regime", choices=_REGIMES, required=True)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--k", type=_nonneg_int, nargs="+", required=True)
    p.add_argument("--j", type=_nonneg_int, nargs="+", required=True)
    p.add_argument("--cases", default="all",
                   help="comma-separated case flags, or 'all'")
    p.add_argument("--cos2i", type=float, default=None)
    p.add_argument("--parallel", type=int, default=1)
    p.add_argument("--budget", type=float, default=None,
                   help="wall-clock budget per case in seconds")
    p.add_argument("--out", required=True, help="catalog file to write")
    p.add_argument("--json", action="store_true")
    p.add_argument("--t-max-factor", type=float, default=3.0)
    p.set_defaults(func=cmd_sweep)

    for name, fn, extra in (("stability", cmd_stability, False),
                            ("trace", cmd_trace, True),
                            ("verify", cmd_verify, False)):
        p = sub.add_parser(name, help=f"{name} for one catalog record")
        p.add_argument("--catalog", required=True)
        p.add_argument("--row", type=int, default=0,
                       help="record index in the catalog (0-based)")
        if extra:
            p.add_argument("--samples", type=int, default=1000)
            p.add_argument("--out", required=True)
        if name == "verify":
            p.add_argument("--t-max-factor", type=float, default=3.0)
        p.set_defaults(func=fn)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(parser, args)


if __name__ == "__main__":
    sys.exit(main())
