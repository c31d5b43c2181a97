"""Quarter-period periodicity residuals at the target plane crossing.

An orbit started in one Lagrangian subplane is propagated to its
(k+j+2)-th passing of the xi1-xi3 plane, counting the departure plane as
the first passing; the free components of the arrival state form the
residual driven to zero.  The crossing time is an output of the event
detector, never an unknown, which avoids the fragile Newton update of the
period when the approximate quarter period is poor.

The third residual component is the interpolated xi2 at the refined
crossing.  It is numerically tiny by construction and is carried only to
keep the system square, three unknowns against three reported conditions.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import solver as _solver
from .dynamics import State6
from .integrator import IntegratorConfig, propagate_to_nth_crossing, propagate_to_time
from .seeds import SeedSpec, StartPlane, build_seed


@dataclass(frozen=True)
class ResidualVector:
    r1: float
    r2: float
    r3: float
    t_quarter: float

    def as_array(self):
        return np.array([self.r1, self.r2, self.r3])

    def inf_norm(self):
        """Largest defect over all three reported conditions."""
        return float(np.max(np.abs(self.as_array())))

    def defect_norm(self):
        """Largest defect over the two genuine (non-event) conditions."""
        return max(abs(self.r1), abs(self.r2))


@dataclass(frozen=True)
class ShootingProblem:
    """Quarter-period boundary-value problem for one seed configuration."""
    model: object
    plane: StartPlane
    crossing_target: int          # plane passings, start and end included
    t0_quarter: float
    t_max: float
    integ: IntegratorConfig
    spec: SeedSpec = None

    @staticmethod
    def from_seed(spec, integ=None, t_max_factor=3.0):
        seed, t0q, target = build_seed(spec)
        integ = _crossing_config(integ, t0q)
        return ShootingProblem(model=spec.model(), plane=spec.case.plane,
                               crossing_target=target, t0_quarter=t0q,
                               t_max=t_max_factor * t0q, integ=integ,
                               spec=spec), seed

    @property
    def n_strict(self):
        """Strict xi2 sign changes sought after t = 0."""
        return self.crossing_target - 1

    def unknowns_from_state(self, state):
        y = state.as_array() if isinstance(state, State6) else np.asarray(state)
        if self.plane == StartPlane.L1:
            return np.array([y[0], y[4], y[5]])
        return np.array([y[0], y[2], y[4]])

    def state_from_unknowns(self, u):
        if self.plane == StartPlane.L1:
            return np.array([u[0], 0.0, 0.0, 0.0, u[1], u[2]])
        return np.array([u[0], 0.0, u[1], 0.0, u[2], 0.0])

    def arrival_defects(self, y):
        """The two genuine boundary defects at the arrival state."""
        if self.plane == StartPlane.L1:
            return y[3], y[5]      # v1, v3 must vanish on the L2 subplane
        return y[2], y[3]          # xi3, v1 must vanish on the L1 subplane


def _crossing_config(integ, t0_quarter):
    """Clamp the step size so a step never straddles two plane crossings."""
    base = integ or IntegratorConfig()
    h_cap = 4.0 * t0_quarter / 200.0
    h_max = min(base.h_max, h_cap)
    return replace(base, h_max=h_max, h_init=min(base.h_init, h_max))


def residual(problem, unknowns):
    """Propagate to the target crossing and report the boundary defects."""
    y0 = problem.state_from_unknowns(np.asarray(unknowns, dtype=float))
    event, _, _ = propagate_to_nth_crossing(
        problem.model, y0, problem.n_strict, cfg=problem.integ,
        t_max=problem.t_max, with_variational=False)
    y = event.state_at_cross.as_array()
    d1, d2 = problem.arrival_defects(y)
    return ResidualVector(d1, d2, y[1], event.t_cross)


def residual_array(problem, unknowns):
    return residual(problem, unknowns).as_array()


def fd_jacobian(problem, unknowns, step_scale=1.0):
    """Forward-difference Jacobian of the residual, step sqrt(eps)*max(|x|,1)."""
    return _solver.fd_jacobian(lambda u: residual_array(problem, u),
                               np.asarray(unknowns, dtype=float),
                               step_scale=step_scale)


def quarter_bundle(problem, unknowns):
    """Crossing event plus the variational bundle at the refined crossing."""
    y0 = problem.state_from_unknowns(np.asarray(unknowns, dtype=float))
    return propagate_to_nth_crossing(
        problem.model, y0, problem.n_strict, cfg=problem.integ,
        t_max=problem.t_max, with_variational=True)


def closure_defect(problem, unknowns, t_quarter):
    """Full-period return defect: |phi(4 t_quarter) - phi(0)| componentwise."""
    y0 = problem.state_from_unknowns(np.asarray(unknowns, dtype=float))
    y_end, _ = propagate_to_time(problem.model, y0, 4.0 * t_quarter,
                                 cfg=problem.integ)
    return np.abs(y_end - y0)


@dataclass(frozen=True)
class AxialProblem:
    """Planar orbit symmetric about both axes of the equal-mass problem.

    The start state sits perpendicular on the xi2 axis, (0, xi2, 0, v1, 0, 0);
    after a quarter period the orbit must cross the xi1 axis perpendicularly,
    so the two unknowns (xi2, v1) face the defects (v1 at the crossing, event
    xi2).  Meaningful for mu = 1/2, where the primaries are interchangeable.
    """
    model: object
    t0_quarter: float
    t_max: float
    integ: IntegratorConfig
    n_strict: int = 1

    @staticmethod
    def build(model, t0_quarter, integ=None, t_max_factor=3.0, n_strict=1):
        return AxialProblem(model=model, t0_quarter=t0_quarter,
                            t_max=t_max_factor * t0_quarter,
                            integ=_crossing_config(integ, t0_quarter),
                            n_strict=n_strict)

    def state_from_unknowns(self, u):
        return np.array([0.0, u[0], 0.0, u[1], 0.0, 0.0])

    def unknowns_from_state(self, y):
        y = np.asarray(y)
        return np.array([y[1], y[3]])


def axial_residual(problem, unknowns):
    y0 = problem.state_from_unknowns(np.asarray(unknowns, dtype=float))
    event, _, _ = propagate_to_nth_crossing(
        problem.model, y0, problem.n_strict, cfg=problem.integ,
        t_max=problem.t_max, with_variational=False)
    y = event.state_at_cross.as_array()
    return ResidualVector(y[3], y[1], 0.0, event.t_cross)


@dataclass
class ShootingResult:
    unknowns: np.ndarray
    residual: ResidualVector
    diagnostics: object
    converged: bool


def solve_shooting(problem, x0, solver_cfg=None):
    """Run the quasi-Newton solve for a subplane or axial problem."""
    axial = isinstance(problem, AxialProblem)
    res_fn = axial_residual if axial else residual

    def fn(u):
        r = res_fn(problem, u)
        return np.array([r.r1, r.r2]) if axial else r.as_array()

    x, diag = _solver.broyden_solve(fn, np.asarray(x0, dtype=float), solver_cfg)
    final = res_fn(problem, x)
    return ShootingResult(unknowns=x, residual=final, diagnostics=diag,
                          converged=diag.converged)
