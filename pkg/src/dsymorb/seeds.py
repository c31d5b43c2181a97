"""Keplerian seed states for the sixteen doubly-symmetric start configurations.

A seed is a circular orbit of the approximate system (central mass only, in
the rotating frame) that starts in one of the two Lagrangian subplanes:

* L1 start: position on the xi1 axis, velocity (0, v2, v3);
* L2 start: position in the xi1-xi3 plane, velocity along xi2 only.

For quarter-period resonance (2k+1) : (2j+1) the mean motion magnitude is
(2j+1)/(2k+1) and the approximate quarter period is (2k+1)*pi/2.  Each of
the three free components may take either sign, eight cases per subplane,
sixteen in total; the velocity sign in a case label refers to the Keplerian
(inertial) term before the frame-rotation correction is subtracted.
"""

import math
import warnings
from dataclasses import dataclass
from enum import Enum

from .dynamics import Model, State6


class Regime(str, Enum):
    COMET_CRTBP = "comet"
    HILL_CRTBP = "hill"
    HILL_LUNAR = "hill-lunar"


class StartPlane(str, Enum):
    L1 = "L1"
    L2 = "L2"


@dataclass(frozen=True)
class CaseDescriptor:
    """One of the sixteen sign configurations."""
    plane: StartPlane
    signs: tuple
    label: str       # paper-style, e.g. "(1,+,-,-)"
    flag: str        # flattened CLI form, e.g. "1+--"


def _make_cases():
    cases = []
    for plane_id, plane in ((1, StartPlane.L1), (2, StartPlane.L2)):
        for s1 in (1, -1):
            for s2 in (1, -1):
                for s3 in (1, -1):
                    signs = (s1, s2, s3)
                    marks = ",".join("+" if s > 0 else "-" for s in signs)
                    label = f"({plane_id},{marks})"
                    flag = f"{plane_id}" + "".join("+" if s > 0 else "-" for s in signs)
                    cases.append(CaseDescriptor(plane, signs, label, flag))
    return tuple(cases)


CASES = _make_cases()
_CASE_BY_FLAG = {c.flag: c for c in CASES}
_CASE_BY_LABEL = {c.label: c for c in CASES}


def enumerate_cases():
    """All sixteen case descriptors, L1 block first."""
    return list(CASES)


def case_from_label(text):
    """Look up a case from either the '(1,+,-,-)' or the '1+--' form."""
    key = text.strip()
    if key in _CASE_BY_FLAG:
        return _CASE_BY_FLAG[key]
    if key in _CASE_BY_LABEL:
        return _CASE_BY_LABEL[key]
    valid = ", ".join(c.flag for c in CASES)
    raise ValueError(f"unknown case {text!r}; valid cases: {valid}")


@dataclass(frozen=True)
class SeedSpec:
    """Resonance integers, start case and physical parameters of one seed."""
    regime: Regime
    k: int
    j: int
    case: CaseDescriptor
    mu: float = 0.0
    inclination: float = math.acos(math.sqrt(1.0 / 3.0))

    def __post_init__(self):
        if self.k < 0 or self.j < 0:
            raise ValueError("resonance integers must be non-negative")
        if not 0.0 < self.inclination < 0.5 * math.pi:
            raise ValueError("inclination must lie in (0, pi/2); retrograde "
                             "planes are selected through the sign triple")
        if self.regime == Regime.COMET_CRTBP:
            if self.k < self.j:
                raise ValueError("comet regime needs k >= j")
            if self.k < 3 * self.j:
                warnings.warn("comet regime is built for k >> j; "
                              f"k={self.k}, j={self.j} is a weak hierarchy")
        else:
            if self.j < self.k:
                raise ValueError("Hill regimes need j >= k")
            if self.j < 3 * self.k:
                warnings.warn("Hill regimes are built for j >> k; "
                              f"k={self.k}, j={self.j} is a weak hierarchy")
        if self.regime != Regime.HILL_LUNAR and not 0.0 < self.mu < 1.0:
            raise ValueError("mass ratio must satisfy 0 < mu < 1")

    @property
    def crossing_target(self):
        """Plane passings within a quarter period, start and end included."""
        return self.k + self.j + 2

    def model(self):
        if self.regime == Regime.COMET_CRTBP:
            return Model.crtbp_barycentric(self.mu)
        if self.regime == Regime.HILL_CRTBP:
            return Model.crtbp_m2_centered(self.mu)
        return Model.hill_lunar()

    def central_mass(self):
        return self.mu if self.regime == Regime.HILL_CRTBP else 1.0

    def cos2i(self):
        return math.cos(self.inclination) ** 2


def spec_from_cos2i(regime, k, j, case, mu=0.0, cos2i=None):
    """Convenience constructor taking cos^2(i) as the tables do."""
    if cos2i is None:
        cos2i = 1.0 / 3.0 if regime == Regime.COMET_CRTBP else 0.5
    if not 0.0 < cos2i < 1.0:
        raise ValueError("cos2i must lie in (0, 1)")
    if isinstance(case, str):
        case = case_from_label(case)
    return SeedSpec(regime=Regime(regime), k=int(k), j=int(j), case=case,
                    mu=float(mu), inclination=math.acos(math.sqrt(cos2i)))


@dataclass(frozen=True)
class ResonanceParams:
    a: float            # circular radius of the seed
    n: float            # signed mean motion of the seed orbit
    epsilon: float      # symplectic-scaling small parameter (diagnostic only)
    T0_quarter: float   # approximate quarter period (2k+1)*pi/2


def resonance_params(spec):
    """Radius, mean motion and scaling parameter for a seed spec.

    The radius follows a = ((2k+1)/(2j+1))^(2/3) in all regimes; for the
    m2-centred regime the Kepler speed uses the central mass mu, so there
    n = sqrt(mu/a^3) and the seed is exactly resonant only as mu -> 1.
    """
    num = 2 * spec.k + 1
    den = 2 * spec.j + 1
    a = (num / den) ** (2.0 / 3.0)
    n_mag = math.sqrt(spec.central_mass() / a**3)
    if spec.case.plane == StartPlane.L1:
        sgn = spec.case.signs[0] * spec.case.signs[1]
    else:
        sgn = spec.case.signs[0] * spec.case.signs[2]
    if spec.regime == Regime.COMET_CRTBP:
        eps = (den / num) ** (1.0 / 3.0)
    else:
        eps = (num / den) ** (1.0 / 3.0)
    return ResonanceParams(a=a, n=sgn * n_mag, epsilon=eps,
                           T0_quarter=num * math.pi / 2.0)


def build_seed(spec):
    """Seed state for a spec.  Returns (State6, T0_quarter, crossing_target).

    The rotating-frame velocity subtracts the frame term xi1 itself (not the
    radius a), so the seed momentum equals the exact circular-orbit momentum
    for every sign case and the subplane invariants hold identically.
    """
    par = resonance_params(spec)
    a = par.a
    vk = math.sqrt(spec.central_mass() / a)
    s1, s2, s3 = spec.case.signs
    ci = math.cos(spec.inclination)
    si = math.sin(spec.inclination)
    if spec.case.plane == StartPlane.L1:
        xi1 = s1 * a
        state = State6(xi1, 0.0, 0.0,
                       0.0, s2 * vk * ci - xi1, s3 * vk * si)
    else:
        xi1 = s1 * a * ci
        state = State6(xi1, 0.0, s2 * a * si,
                       0.0, s3 * vk - xi1, 0.0)
    return state, par.T0_quarter, spec.crossing_target
