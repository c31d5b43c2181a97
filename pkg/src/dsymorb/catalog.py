"""Orbit records, catalog persistence, the solve pipeline and sweeps.

The catalog stores rotating-frame rectangular coordinates exactly as the
result tables do (barycentric for the comet regime, m2-centred otherwise),
one row per attempted case, 17 significant digits so every double survives
a round trip.
"""

import json
import math
import time
from dataclasses import dataclass

import numpy as np

from .dynamics import Model
from .errors import (CatalogFormatError, CollisionProximity, CrossingNotFound,
                     DsymorbError, IntegrationError, SolverError,
                     TimeBudgetExceeded)
from .integrator import IntegratorConfig, propagate_to_time
from .seeds import Regime, spec_from_cos2i
from .shooting import (AxialProblem, ShootingProblem, axial_residual, residual,
                       solve_shooting)
from .solver import SolverConfig
from .stability import MonodromyResult
from . import shooting as _shooting

CONVERGED_LIMIT = 1e-9
AXIAL_CASE = "axial"

CSV_HEADER = ("regime,mu,cos2i,k,j,case,x1,x2,x3,t_quarter,residual,"
              "lam1_re,lam1_im,lam2_re,lam2_im,lam3_re,lam3_im,"
              "lam4_re,lam4_im,lam5_re,lam5_im,lam6_re,lam6_im,"
              "rho,class,iters")
_N_COLS = len(CSV_HEADER.split(","))


@dataclass
class OrbitRecord:
    regime: str
    mu: float
    cos2i: float
    k: int
    j: int
    case: str                  # flattened label, e.g. "1+--", or "axial"
    x1: float
    x2: float
    x3: float
    t_quarter: float
    residual: float            # infinity norm over the reported conditions
    multipliers: tuple         # six complex numbers
    rho: float
    classification: str
    iters: int

    @property
    def converged(self):
        return (not self.classification.startswith("Failed")
                and math.isfinite(self.residual)
                and self.residual <= CONVERGED_LIMIT)

    def unknowns(self):
        return np.array([self.x1, self.x2, self.x3])

    def initial_state(self):
        problem = record_problem(self)[0]
        u = self.unknowns()
        if self.case == AXIAL_CASE:
            return problem.state_from_unknowns(u[:2])
        return problem.state_from_unknowns(u)


def _fmt(v):
    return f"{v:.17g}"


def record_to_row(rec):
    lam = []
    for m in rec.multipliers:
        lam.append(_fmt(m.real))
        lam.append(_fmt(m.imag))
    cells = [rec.regime, _fmt(rec.mu), _fmt(rec.cos2i), str(rec.k), str(rec.j),
             rec.case, _fmt(rec.x1), _fmt(rec.x2), _fmt(rec.x3),
             _fmt(rec.t_quarter), _fmt(rec.residual), *lam,
             _fmt(rec.rho), rec.classification, str(rec.iters)]
    return ",".join(cells)


def row_to_record(row, line_no=None):
    cells = row.split(",")
    if len(cells) != _N_COLS:
        raise CatalogFormatError(
            f"expected {_N_COLS} columns, found {len(cells)}", line_no)
    try:
        mults = tuple(complex(float(cells[11 + 2 * i]), float(cells[12 + 2 * i]))
                      for i in range(6))
        return OrbitRecord(
            regime=cells[0], mu=float(cells[1]), cos2i=float(cells[2]),
            k=int(cells[3]), j=int(cells[4]), case=cells[5],
            x1=float(cells[6]), x2=float(cells[7]), x3=float(cells[8]),
            t_quarter=float(cells[9]), residual=float(cells[10]),
            multipliers=mults, rho=float(cells[23]),
            classification=cells[24], iters=int(cells[25]))
    except ValueError as exc:
        raise CatalogFormatError(str(exc), line_no) from exc


def write_catalog(records, path, fmt="csv"):
    if fmt == "json":
        payload = []
        for r in records:
            d = {"regime": r.regime, "mu": r.mu, "cos2i": r.cos2i, "k": r.k,
                 "j": r.j, "case": r.case, "x1": r.x1, "x2": r.x2, "x3": r.x3,
                 "t_quarter": r.t_quarter, "residual": r.residual,
                 "multipliers": [[m.real, m.imag] for m in r.multipliers],
                 "rho": r.rho, "class": r.classification, "iters": r.iters}
            payload.append(d)
        text = json.dumps(payload, indent=1, default=_fmt_json)
        with open(path, "w") as fh:
            fh.write(text + "\n")
        return
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in records:
            fh.write(record_to_row(r) + "\n")


def _fmt_json(v):
    raise TypeError(f"not JSON serialisable: {v!r}")


def read_catalog(path):
    if str(path).endswith(".json"):
        with open(path) as fh:
            payload = json.load(fh)
        return [OrbitRecord(regime=d["regime"], mu=d["mu"], cos2i=d["cos2i"],
                            k=d["k"], j=d["j"], case=d["case"], x1=d["x1"],
                            x2=d["x2"], x3=d["x3"], t_quarter=d["t_quarter"],
                            residual=d["residual"],
                            multipliers=tuple(complex(a, b)
                                              for a, b in d["multipliers"]),
                            rho=d["rho"], classification=d["class"],
                            iters=d["iters"]) for d in payload]
    records = []
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise CatalogFormatError("missing or mismatched header", 1)
    for i, row in enumerate(lines[1:], start=2):
        if not row.strip():
            continue
        records.append(row_to_record(row, line_no=i))
    return records


# ---------------------------------------------------------------------------
# solve pipeline

_NAN6 = tuple(complex(float("nan"), 0.0) for _ in range(6))


def record_problem(rec, integ=None, t_max_factor=3.0):
    """Rebuild the shooting problem a record was produced by."""
    if rec.case == AXIAL_CASE:
        model = Model.crtbp_barycentric(rec.mu)
        problem = AxialProblem.build(model, rec.t_quarter,
                                     integ=integ, t_max_factor=t_max_factor)
        return problem, None
    spec = spec_from_cos2i(rec.regime, rec.k, rec.j, rec.case,
                           mu=rec.mu if rec.regime != Regime.HILL_LUNAR.value else 0.0,
                           cos2i=rec.cos2i)
    problem, seed = ShootingProblem.from_seed(spec, integ=integ,
                                              t_max_factor=t_max_factor)
    return problem, seed


def _failed_record(spec, reason, iters=0):
    return OrbitRecord(
        regime=spec.regime.value, mu=spec.mu, cos2i=spec.cos2i(),
        k=spec.k, j=spec.j, case=spec.case.flag,
        x1=float("nan"), x2=float("nan"), x3=float("nan"),
        t_quarter=float("nan"), residual=float("nan"),
        multipliers=_NAN6, rho=float("nan"),
        classification=f"Failed:{reason}", iters=iters)


def solve_case(spec, integ=None, solver_cfg=None, t_max_factor=3.0,
               time_budget=None):
    """Seed -> quasi-Newton continuation -> stability, as one record.

    Failed continuations (no crossing, collision, solver breakdown) come
    back as records marked Failed:<reason> rather than exceptions, so sweep
    drivers can keep going.
    """
    problem, seed = ShootingProblem.from_seed(spec, integ=integ,
                                              t_max_factor=t_max_factor)
    x0 = problem.unknowns_from_state(seed)
    solver_cfg = solver_cfg or SolverConfig()

    deadline = None if time_budget is None else time.monotonic() + time_budget

    def watchdog(_it, _x, _f):
        if deadline is not None and time.monotonic() > deadline:
            raise TimeBudgetExceeded(f"case {spec.case.flag} over budget")

    try:
        from .solver import broyden_solve

        def fn(u):
            r = residual(problem, u)
            return r.as_array()

        x, diag = broyden_solve(fn, x0, solver_cfg, callback=watchdog)
        iters = diag.iterations
    except SolverError as exc:
        return _failed_record(spec, type(exc).__name__,
                              iters=getattr(exc.diagnostics, "iterations", 0))
    except (CrossingNotFound, CollisionProximity, IntegrationError,
            TimeBudgetExceeded) as exc:
        return _failed_record(spec, type(exc).__name__)

    final = residual(problem, x)
    try:
        _, bundle, _ = _shooting.quarter_bundle(problem, x)
        mono = MonodromyResult.from_quarter(bundle.Z, problem.plane)
        mults = tuple(complex(m) for m in mono.multipliers)
        rho = mono.rho
        cls = mono.classification.value
    except DsymorbError as exc:
        mults, rho, cls = _NAN6, float("nan"), f"Failed:{type(exc).__name__}"

    return OrbitRecord(
        regime=spec.regime.value, mu=spec.mu, cos2i=spec.cos2i(),
        k=spec.k, j=spec.j, case=spec.case.flag,
        x1=float(x[0]), x2=float(x[1]), x3=float(x[2]),
        t_quarter=final.t_quarter, residual=final.inf_norm(),
        multipliers=mults, rho=rho, classification=cls, iters=iters)


def solve_axial_case(mu, state0, t0, integ=None, solver_cfg=None,
                     t_max_factor=3.0, n_strict=1):
    """Planar axial-symmetric orbit of the equal-mass problem.

    state0 is the full approximate start state (0, y, 0, xdot, 0, 0); t0 the
    approximate full period.
    """
    state0 = np.asarray(state0, dtype=float)
    expected_zero = state0[[0, 2, 4, 5]]
    if np.any(expected_zero != 0.0):
        raise ValueError("axial seed must look like (0, y, 0, xdot, 0, 0)")
    model = Model.crtbp_barycentric(mu)
    problem = AxialProblem.build(model, t0 / 4.0, integ=integ,
                                 t_max_factor=t_max_factor, n_strict=n_strict)
    x0 = problem.unknowns_from_state(state0)
    result = solve_shooting(problem, x0, solver_cfg)
    final = result.residual
    return OrbitRecord(
        regime=Regime.COMET_CRTBP.value, mu=mu, cos2i=1.0, k=0, j=0,
        case=AXIAL_CASE, x1=float(result.unknowns[0]),
        x2=float(result.unknowns[1]), x3=0.0,
        t_quarter=final.t_quarter, residual=final.inf_norm(),
        multipliers=_NAN6, rho=float("nan"),
        classification="PlanarAxial", iters=result.diagnostics.iterations)


# ---------------------------------------------------------------------------
# sweeps

@dataclass(frozen=True)
class SweepSpec:
    regime: Regime
    ks: tuple
    js: tuple
    cases: tuple               # flattened labels
    mu: float = 0.0
    cos2i: float = None
    parallelism: int = 1
    time_budget: float = None  # seconds per case
    t_max_factor: float = 3.0

    def __post_init__(self):
        if not self.ks or not self.js or not self.cases:
            raise ValueError("sweep ranges must be non-empty")

    def seed_specs(self):
        specs = []
        for k in self.ks:
            for j in self.js:
                for case in self.cases:
                    try:
                        specs.append(spec_from_cos2i(
                            self.regime, k, j, case, mu=self.mu,
                            cos2i=self.cos2i))
                    except ValueError:
                        specs.append(None)  # invalid (k, j) for the regime
        return specs


def _sweep_one(args):
    spec, t_max_factor, time_budget = args
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return solve_case(spec, t_max_factor=t_max_factor,
                          time_budget=time_budget)


def run_sweep(sweep, on_record=None):
    """Execute a sweep; records come back in spec order whatever the
    parallelism, so catalogs are byte-identical across worker counts."""
    specs = sweep.seed_specs()
    jobs = [(s, sweep.t_max_factor, sweep.time_budget)
            for s in specs if s is not None]
    records = []
    if sweep.parallelism <= 1:
        for job in jobs:
            rec = _sweep_one(job)
            records.append(rec)
            if on_record:
                on_record(rec)
    else:
        import concurrent.futures as cf
        with cf.ProcessPoolExecutor(max_workers=sweep.parallelism) as pool:
            futures = [pool.submit(_sweep_one, job) for job in jobs]
            for fut in futures:          # consume in submit order
                rec = fut.result()
                records.append(rec)
                if on_record:
                    on_record(rec)
    return records


def sweep_summary(records):
    converged = sum(1 for r in records if r.converged)
    collisions = sum(1 for r in records
                     if r.classification == "Failed:CollisionProximity")
    failed = sum(1 for r in records
                 if r.classification.startswith("Failed")) - collisions
    return {"attempted": len(records), "converged": converged,
            "failed": failed, "collision": collisions}


# ---------------------------------------------------------------------------
# trace and verify

def trace_states(rec, n_samples, integ=None):
    """Sample the orbit over one full period from the stored initial values.

    Returns (times, states) with states[i] the 6-state at times[i]."""
    if not rec.converged and rec.classification != "PlanarAxial":
        raise ValueError("can only trace converged records")
    integ = integ or IntegratorConfig()
    problem, _ = record_problem(rec, integ=integ)
    y = rec.initial_state().copy()
    period = 4.0 * rec.t_quarter
    times = np.linspace(0.0, period, n_samples)
    states = np.empty((n_samples, 6))
    states[0] = y
    cfg = problem.integ
    for i in range(1, n_samples):
        dt = times[i] - times[i - 1]
        y, _ = propagate_to_time(problem.model, y, dt, cfg=cfg)
        states[i] = y
    return times, states


def write_trace(rec, n_samples, path, integ=None):
    times, states = trace_states(rec, n_samples, integ=integ)
    with open(path, "w") as fh:
        for t, row in zip(times, states):
            fh.write(" ".join(_fmt(v) for v in (t, *row)) + "\n")


def verify_record(rec, integ=None, t_max_factor=3.0):
    """Re-propagate a record from its stored initial values.

    Returns a dict with both candidate accuracy norms: over all three
    reported conditions and over the two genuine velocity/position defects."""
    problem, _ = record_problem(rec, integ=integ, t_max_factor=t_max_factor)
    if rec.case == AXIAL_CASE:
        r = axial_residual(problem, rec.unknowns()[:2])
    else:
        r = residual(problem, rec.unknowns())
    return {"residual_all": r.inf_norm(),
            "residual_defects": r.defect_norm(),
            "t_quarter": r.t_quarter,
            "t_quarter_change": abs(r.t_quarter - rec.t_quarter),
            "ok": r.inf_norm() <= 1e-8}
