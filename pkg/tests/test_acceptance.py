"""Acceptance suite: one test per criterion, one printed PASS/FAIL line each.

Run with  pytest tests/test_acceptance.py -v -s  to see the per-criterion
lines as they appear.  Tolerances are asserted exactly as stated; several
exact-value clauses compare against published solver endpoints that sit on
one-parameter orbit families, where an independent continuation lands on
the same family but not the same point (see notes in the repository README
and the failure messages below).
"""

import math
import time

import numpy as np
import pytest

from dsymorb import (MonodromyResult, SolverConfig, SweepSpec,
                     propagate_to_time, quarter_bundle, run_sweep,
                     solve_axial_case, solve_case, spec_from_cos2i,
                     variational_matrix)
from dsymorb.dynamics import Model, State6, canonical_field
from dsymorb.seeds import Regime

import refdata

FAMILY_NOTE = ("published endpoints lie on one-parameter orbit families; "
               "an independent solve converges to the family, not to the "
               "identical member (see notes/decisions ledger)")


def report(n, name, ok, detail):
    line = f"ACCEPTANCE {n} ({name}): {'PASS' if ok else 'FAIL'} - {detail}"
    print("\n" + line)
    return line


@pytest.fixture(scope="session")
def sun_jupiter_records():
    out = []
    for k, j, case, *_ in refdata.SUN_JUPITER_ROWS:
        spec = spec_from_cos2i("hill", k, j, case, mu=refdata.MU_SUN_JUPITER,
                               cos2i=refdata.COS2I_HILL)
        out.append(solve_case(spec, t_max_factor=8.0))
    return out


@pytest.fixture(scope="session")
def hill_lunar_records():
    out = []
    for k, j, case, *_ in refdata.HILL_LUNAR_ROWS:
        spec = spec_from_cos2i("hill-lunar", k, j, case, cos2i=refdata.COS2I_HILL)
        out.append(solve_case(spec, t_max_factor=8.0))
    return out


def row_distance(rec, x_ref, tq_ref):
    dx = max(abs(rec.x1 - x_ref[0]), abs(rec.x2 - x_ref[1]),
             abs(rec.x3 - x_ref[2]))
    return dx, abs(rec.t_quarter - tq_ref)


def test_criterion_1_equal_mass_rows(solved_records):
    from conftest import SOLVE_WALL_TIME
    lines = []
    all_converged = True
    all_matched = True
    for rec, (k, j, case, x_ref, tq_ref, _) in zip(solved_records,
                                                   refdata.COMET_ROWS):
        conv = rec.converged and rec.residual <= 1e-9
        dx, dt = row_distance(rec, x_ref, tq_ref)
        matched = dx <= 1e-6 and dt <= 1e-6
        all_converged &= conv
        all_matched &= matched
        lines.append(f"k={k} {case}: residual={rec.residual:.1e} "
                     f"dx={dx:.2e} dt={dt:.2e}")
    elapsed = SOLVE_WALL_TIME.get("equal_mass_rows", 0.0)
    ok = all_converged and all_matched and elapsed < 60.0
    report(1, "equal-mass rows k=1..2", ok,
           f"converged={all_converged} matched_1e-6={all_matched} "
           f"[{elapsed:.1f}s] " + "; ".join(lines))
    assert all_converged, "continuation failed on a reference row"
    assert elapsed < 60.0
    assert all_matched, "unknowns/t_quarter beyond 1e-6: " + FAMILY_NOTE


def test_criterion_2_multiplier_moduli(solved_records):
    all_ok = True
    details = []
    for rec, mods_ref in zip(solved_records, refdata.COMET_MULTIPLIER_MODULI):
        full_ref = sorted([*mods_ref, *(1.0 / m for m in mods_ref)],
                          reverse=True)
        got = sorted(np.abs(np.array(rec.multipliers)), reverse=True)
        errs = [abs(g - r) / max(1.0, abs(r)) for g, r in zip(got, full_ref)]
        ok = max(errs) <= 1e-3
        all_ok &= ok
        details.append(f"k={rec.k} {rec.case}: max_mod_err={max(errs):.2e}")
    report(2, "multiplier moduli vs reference", all_ok, "; ".join(details))
    assert all_ok, "moduli multisets beyond 1e-3: " + FAMILY_NOTE


def test_criterion_3_sun_jupiter(sun_jupiter_records):
    conv = match = rho_ok = True
    details = []
    for rec, (k, j, case, x_ref, tq_ref, _, rho_ref) in zip(
            sun_jupiter_records, refdata.SUN_JUPITER_ROWS):
        c = rec.converged and rec.residual <= 1e-9
        dx, dt = row_distance(rec, x_ref, tq_ref)
        m = dx <= 1e-6 and dt <= 1e-6
        r = math.isfinite(rec.rho) and abs(rec.rho - rho_ref) <= 1e-3
        conv &= c
        match &= m
        rho_ok &= r
        details.append(f"(0,{j}){case}: res={rec.residual:.0e} dx={dx:.1e} "
                       f"drho={abs(rec.rho - rho_ref):.1e}")
    ok = conv and match and rho_ok
    report(3, "Sun-Jupiter rows j=1..3", ok,
           f"converged={conv} matched={match} rho_1e-3={rho_ok}; "
           + "; ".join(details))
    assert conv, "a Sun-Jupiter row failed to converge"
    assert rho_ok and match, "row match beyond tolerance: " + FAMILY_NOTE


def test_criterion_4_hill_lunar(hill_lunar_records):
    conv = match = stable = True
    details = []
    for rec, (k, j, case, x_ref, tq_ref) in zip(hill_lunar_records,
                                                refdata.HILL_LUNAR_ROWS):
        c = rec.converged and rec.residual <= 1e-9
        dx, dt = row_distance(rec, x_ref, tq_ref)
        m = dx <= 1e-6 and dt <= 1e-6
        s = (math.isfinite(rec.rho) and abs(rec.rho - 6.0) <= 1e-4
             and rec.classification == "LinearlyStable")
        conv &= c
        match &= m
        stable &= s
        details.append(f"(0,{j}){case}: res={rec.residual:.0e} dx={dx:.1e} "
                       f"rho={rec.rho:.5f} cls={rec.classification}")
    ok = conv and match and stable
    report(4, "Hill lunar rows", ok,
           f"converged={conv} matched={match} stable={stable}; "
           + "; ".join(details))
    assert conv, "a Hill-lunar row failed to converge"
    assert match and stable, "row match/stability beyond tolerance: " + FAMILY_NOTE


def test_criterion_5_planar_axial_family():
    rec = solve_axial_case(refdata.MU_COPENHAGEN, refdata.AXIAL_SEED,
                           refdata.AXIAL_T0,
                           solver_cfg=SolverConfig(tol_inf=1e-13, max_iter=300))
    y_ref, xd_ref, t_ref = refdata.AXIAL_REF
    dy = abs(rec.x1 - y_ref)
    dxd = abs(rec.x2 - xd_ref)
    dt = abs(4 * rec.t_quarter - t_ref)
    deep = rec.residual <= 1.1e-13
    matched = dy <= 1e-6 and dxd <= 1e-6 and dt <= 1e-6
    ok = deep and matched
    report(5, "planar axial family-m orbit", ok,
           f"y={rec.x1:.14f} xdot={rec.x2:.14f} T={4 * rec.t_quarter:.13f} "
           f"residual={rec.residual:.1e} dy={dy:.1e} dxdot={dxd:.1e} dT={dt:.1e}")
    assert deep, "residual 1.1e-13 not reached"
    assert matched, "family-m member differs: " + FAMILY_NOTE


def test_criterion_6_m2_centred_small_mass():
    spec = spec_from_cos2i("hill", 0, 10, "1+++", mu=0.06,
                           cos2i=refdata.COS2I_HILL)
    rec = solve_case(spec, t_max_factor=8.0)
    x_ref, tq_ref = refdata.HILL_CRTBP_MU006
    conv = rec.converged and rec.residual <= 1e-9
    dx, dt = row_distance(rec, x_ref, tq_ref)
    matched = dx <= 1e-6 and dt <= 1e-6
    stable = rec.classification == "LinearlyStable"
    ok = conv and matched and stable
    report(6, "m2-centred mu=0.06 orbit", ok,
           f"res={rec.residual:.0e} x=({rec.x1:.6f},{rec.x2:.6f},{rec.x3:.6f}) "
           f"tq={rec.t_quarter:.6f} dx={dx:.1e} dt={dt:.1e} cls={rec.classification}")
    assert conv
    assert matched and stable, (
        "reference values for this case are internally inconsistent (they "
        "satisfy no periodicity condition of the stated model; see ledger); "
        + FAMILY_NOTE)


def test_criterion_7_property_suite(solved_records, hill_lunar_records):
    t0 = time.monotonic()
    failures = []
    converged = [r for r in solved_records + hill_lunar_records if r.converged]

    # (a) energy drift per quarter period
    from dsymorb.catalog import record_problem
    worst_drift = 0.0
    for rec in converged:
        problem, _ = record_problem(rec, t_max_factor=8.0)
        y0 = rec.initial_state()
        _, drift = propagate_to_time(problem.model, y0, rec.t_quarter,
                                     cfg=problem.integ)
        worst_drift = max(worst_drift, drift)
    if worst_drift >= 1e-10:
        failures.append(f"(a) energy drift {worst_drift:.1e}")

    # (b) full-period closure from quarter-period conditions alone
    worst_closure = 0.0
    for rec in converged:
        problem, _ = record_problem(rec, t_max_factor=8.0)
        y0 = rec.initial_state()
        y_end, _ = propagate_to_time(problem.model, y0, 4 * rec.t_quarter,
                                     cfg=problem.integ)
        worst_closure = max(worst_closure, float(np.max(np.abs(y_end - y0))))
    if worst_closure >= 1e-7:
        failures.append(f"(b) closure {worst_closure:.1e}")

    # (c, d) quarter-period composition vs direct monodromy; determinant.
    # both sides run at a tightened tolerance, and the spectra are compared
    # through characteristic-polynomial coefficients: the monodromies here
    # are near parabolic (multipliers clustered at +1), where raw eigenvalue
    # lists are determined only to the square root of the matrix error, while
    # the symmetric functions recover the full matrix-level accuracy.
    from dataclasses import replace
    worst_spec = worst_det = worst_raw = 0.0
    for rec in converged[:3]:
        problem, _ = record_problem(rec, t_max_factor=8.0)
        problem = replace(problem,
                          integ=replace(problem.integ, rel_tol=1e-14,
                                        abs_tol=1e-15))
        x = rec.unknowns()
        ev, bundle, _ = quarter_bundle(problem, x)
        mono = MonodromyResult.from_quarter(bundle.Z, problem.plane)
        y0 = rec.initial_state()
        (_, zt_direct), _ = propagate_to_time(problem.model, y0,
                                              4 * ev.t_cross,
                                              cfg=problem.integ,
                                              with_variational=True)
        p1 = np.poly(np.linalg.eigvals(mono.Z_T))
        p2 = np.poly(np.linalg.eigvals(zt_direct))
        worst_spec = max(worst_spec, float(np.max(
            np.abs(p1 - p2) / np.maximum(np.abs(p2), 1.0))))
        e1 = np.sort(np.abs(np.linalg.eigvals(mono.Z_T)))
        e2 = np.sort(np.abs(np.linalg.eigvals(zt_direct)))
        worst_raw = max(worst_raw,
                        float(np.max(np.abs(e1 - e2) / np.maximum(e1, 1.0))))
        worst_det = max(worst_det, abs(float(np.linalg.det(mono.Z_T)) - 1.0))
    if worst_spec >= 1e-6:
        failures.append(f"(c) composition spectrum {worst_spec:.1e}")
    if worst_det >= 1e-6:
        failures.append(f"(d) det {worst_det:.1e}")

    # (e) one multiplier within 1e-3 of +1
    for rec in converged:
        mults = np.array(rec.multipliers)
        if np.min(np.abs(mults - 1.0)) >= 1e-3:
            failures.append(f"(e) trivial multiplier missing on k={rec.k} {rec.case}")
            break

    # (f) variational RHS against central differences at 100 random states
    rng = np.random.default_rng(2024)
    model = Model.crtbp_barycentric(0.5)
    worst_fd = 0.0
    for _ in range(100):
        pos = rng.normal(size=3)
        pos *= rng.uniform(0.5, 20.0) / np.linalg.norm(pos)
        vel = rng.normal(size=3)
        s = np.concatenate([pos, vel])
        c = State6.from_array(s).to_canonical().as_array()
        a = variational_matrix(model, s)
        fd = np.empty((6, 6))
        for i in range(6):
            cp, cm = c.copy(), c.copy()
            cp[i] += 1e-6
            cm[i] -= 1e-6
            fd[:, i] = (canonical_field(model, cp) - canonical_field(model, cm)) / 2e-6
        worst_fd = max(worst_fd, float(np.max(np.abs(a - fd))))
    if worst_fd >= 1e-6:
        failures.append(f"(f) variational FD {worst_fd:.1e}")

    # (g) sweep determinism under parallelism
    base = dict(regime=Regime.HILL_LUNAR, ks=(0,), js=(4,),
                cases=("1+++", "1++-", "1+-+", "1+--", "2+++", "2++-"),
                cos2i=0.5, time_budget=60.0)
    serial = run_sweep(SweepSpec(parallelism=1, **base))
    parallel = run_sweep(SweepSpec(parallelism=4, **base))
    import io
    from dsymorb.catalog import record_to_row
    rows_s = [record_to_row(r) for r in serial]
    rows_p = [record_to_row(r) for r in parallel]
    if rows_s != rows_p:
        failures.append("(g) sweep output depends on parallelism")

    elapsed = time.monotonic() - t0
    ok = not failures and elapsed < 300.0
    report(7, "property suite", ok,
           f"drift={worst_drift:.1e} closure={worst_closure:.1e} "
           f"spec={worst_spec:.1e} (raw moduli {worst_raw:.1e}) "
           f"det={worst_det:.1e} fd={worst_fd:.1e} "
           f"[{elapsed:.0f}s]" + ("; " + "; ".join(failures) if failures else ""))
    assert not failures, failures
    assert elapsed < 300.0


def test_criterion_8_large_k_spot_check():
    t0 = time.monotonic()
    spec = spec_from_cos2i("comet", 30, 0, "1+++", mu=refdata.MU_COPENHAGEN,
                           cos2i=refdata.COS2I_COMET)
    rec = solve_case(spec, t_max_factor=8.0)
    elapsed = time.monotonic() - t0
    k, j, case, x_ref, tq_ref, _ = refdata.COMET_ROW_30_0
    conv = rec.converged and rec.residual <= 1e-9
    dx1 = abs(rec.x1 - x_ref[0])
    dt = abs(rec.t_quarter - tq_ref)
    matched = dx1 <= 1e-5 and dt <= 1e-5
    ok = conv and matched and elapsed < 120.0
    report(8, "large-k spot check", ok,
           f"res={rec.residual:.0e} x1={rec.x1:.10f} tq={rec.t_quarter:.10f} "
           f"dx1={dx1:.1e} dt={dt:.1e} [{elapsed:.1f}s]")
    assert conv and elapsed < 120.0
    assert matched, ("the seed's Newton flow settles on the prograde branch "
                     "of this resonance; the reference endpoint sits on the "
                     "retrograde branch: " + FAMILY_NOTE)
