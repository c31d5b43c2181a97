import math

import pytest

from dsymorb import (Model, Regime, SeedSpec, StartPlane, build_seed,
                     case_from_label, enumerate_cases, propagate_to_time,
                     resonance_params, spec_from_cos2i)
from dsymorb.integrator import IntegratorConfig


def test_sixteen_distinct_cases():
    cases = enumerate_cases()
    assert len(cases) == 16
    assert len({c.flag for c in cases}) == 16
    assert len({c.label for c in cases}) == 16
    assert sum(1 for c in cases if c.plane == StartPlane.L1) == 8


def test_case_lookup_both_syntaxes():
    c = case_from_label("(1,+,-,-)")
    assert c.flag == "1+--"
    assert c.plane == StartPlane.L1
    assert c.signs == (1, -1, -1)
    c2 = case_from_label("2+-+")
    assert c2.plane == StartPlane.L2
    assert c2.signs == (1, -1, 1)


def test_case_lookup_rejects_unknown():
    with pytest.raises(ValueError, match="1\\+\\+\\+"):
        case_from_label("3+++")


def test_case_label_sign_semantics():
    # "(1,+,-,-)": L1 start, xi1 > 0, Kepler transverse term < 0, v3 < 0
    spec = spec_from_cos2i("comet", 1, 0, "1+--", mu=0.5, cos2i=1 / 3)
    seed, _, _ = build_seed(spec)
    a = resonance_params(spec).a
    assert seed.xi1 > 0
    kepler_term = seed.v2 + seed.xi1  # remove frame rotation
    assert kepler_term < 0
    assert seed.v3 < 0
    # "(2,+,-,+)": L2 start, xi1 > 0, xi3 < 0, transverse Kepler term > 0
    spec2 = spec_from_cos2i("hill-lunar", 0, 4, "2+-+", cos2i=0.5)
    seed2, _, _ = build_seed(spec2)
    assert seed2.xi1 > 0 and seed2.xi3 < 0
    assert seed2.v2 + seed2.xi1 > 0


def test_point_reflection_between_opposite_sign_cases():
    up = build_seed(spec_from_cos2i("comet", 2, 0, "1+++", mu=0.5))[0].as_array()
    dn = build_seed(spec_from_cos2i("comet", 2, 0, "1---", mu=0.5))[0].as_array()
    # xi1 and the Kepler parts of both velocities flip sign together
    assert dn[0] == -up[0]
    assert dn[4] + dn[0] == pytest.approx(-(up[4] + up[0]), rel=1e-15)
    assert dn[5] == -up[5]


def test_resonance_comet_k30():
    spec = spec_from_cos2i("comet", 30, 0, "1+++", mu=0.5, cos2i=1 / 3)
    par = resonance_params(spec)
    assert par.a == pytest.approx(61 ** (2 / 3), rel=1e-15)
    assert par.a == pytest.approx(15.496, abs=5e-4)
    assert par.T0_quarter == pytest.approx(61 * math.pi / 2, rel=1e-15)
    assert par.epsilon ** 3 == pytest.approx(1 / 61, rel=1e-12)
    assert spec.crossing_target == 32


def test_resonance_unit_case():
    spec = spec_from_cos2i("comet", 0, 0, "1+--", mu=0.5)
    par = resonance_params(spec)
    assert par.a == 1.0
    assert abs(par.n) == pytest.approx(1.0)
    assert par.T0_quarter == pytest.approx(math.pi / 2)


def test_resonance_m2_centred_radius_and_mean_motion():
    spec = spec_from_cos2i("hill", 0, 10, "1+++", mu=0.06, cos2i=0.5)
    par = resonance_params(spec)
    assert par.a == pytest.approx((1 / 21) ** (2 / 3), rel=1e-15)
    assert par.a == pytest.approx(0.13138, abs=5e-6)
    assert abs(par.n) == pytest.approx(21 * math.sqrt(0.06), rel=1e-12)


@pytest.mark.parametrize("regime,mu", [(Regime.COMET_CRTBP, 0.5),
                                       (Regime.HILL_CRTBP, 0.3),
                                       (Regime.HILL_LUNAR, 0.0)])
def test_keplers_third_law_every_case(regime, mu):
    k, j = (4, 1) if regime == Regime.COMET_CRTBP else (1, 4)
    for case in enumerate_cases():
        spec = SeedSpec(regime=regime, k=k, j=j, case=case, mu=mu,
                        inclination=0.8)
        par = resonance_params(spec)
        assert par.n ** 2 * par.a ** 3 == pytest.approx(spec.central_mass(),
                                                        rel=1e-15)


def test_seed_states_lie_in_their_subplane():
    for case in enumerate_cases():
        spec = SeedSpec(regime=Regime.HILL_LUNAR, k=0, j=4, case=case,
                        inclination=math.pi / 4)
        seed, _, _ = build_seed(spec)
        assert seed.xi2 == 0.0 and seed.v1 == 0.0
        if case.plane == StartPlane.L1:
            assert seed.xi3 == 0.0
        else:
            assert seed.v3 == 0.0


@pytest.mark.parametrize("regime,k,j,mu", [("comet", 1, 0, 0.5),
                                           ("comet", 3, 1, 0.5),
                                           ("hill-lunar", 0, 4, 0.0),
                                           ("hill-lunar", 1, 5, 0.0)])
def test_kepler_closure_all_sixteen_cases(regime, k, j, mu):
    # seeds are exact quarter-period orbits of the approximate system: after
    # T0/4 around the central mass alone they reach the other subplane
    cfg = IntegratorConfig(rel_tol=1e-14, abs_tol=1e-16)
    model = Model.rotating_kepler(1.0)
    for case in enumerate_cases():
        spec = spec_from_cos2i(regime, k, j, case.flag, mu=mu)
        seed, t0q, _ = build_seed(spec)
        y, _ = propagate_to_time(model, seed.as_array(), t0q, cfg=cfg)
        if case.plane == StartPlane.L1:
            defects = (y[1], y[3], y[5])     # arrive on the L2 subplane
        else:
            defects = (y[1], y[2], y[3])     # arrive on the L1 subplane
        assert max(abs(d) for d in defects) < 1e-10, (case.flag, defects)


def test_validation_rules():
    with pytest.raises(ValueError):
        spec_from_cos2i("comet", 1, 2, "1+++", mu=0.5)     # k < j
    with pytest.raises(ValueError):
        spec_from_cos2i("hill-lunar", 3, 1, "1+++")        # j < k
    with pytest.raises(ValueError):
        spec_from_cos2i("comet", 1, 0, "1+++", mu=1.5)
    with pytest.raises(ValueError):
        spec_from_cos2i("comet", 1, 0, "1+++", mu=0.5, cos2i=1.7)
    with pytest.warns(UserWarning):
        spec_from_cos2i("comet", 2, 1, "1+++", mu=0.5)     # weak hierarchy
    spec_from_cos2i("hill-lunar", 0, 0, "1+++")            # boundary is legal
