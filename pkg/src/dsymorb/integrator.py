"""Adaptive RKF7(8) propagation with xi2-plane crossing detection.

Crossings of the xi1-xi3 plane are located by bracketing a sign change of
xi2 between accepted steps, then refined with the two-point cubic Hermite
interpolant of the step and an analytic root of its xi2 component.  The
variational bundle is interpolated to the crossing with the same polynomial,
column by column.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .dynamics import CanonicalState, State6
from .errors import (CollisionProximity, CrossingNotFound, MaxStepsExceeded,
                     NoRootInInterval, StepSizeUnderflow)


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-13
    abs_tol: float = 1e-14
    h_init: float = 1e-3
    h_min: float = 1e-13
    h_max: float = math.inf
    max_steps: int = 2_000_000

    def __post_init__(self):
        if not (self.rel_tol > 0.0 and self.abs_tol > 0.0):
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.h_min <= self.h_init <= self.h_max:
            raise ValueError("need 0 < h_min <= h_init <= h_max")


@dataclass
class VariationalBundle:
    """Trajectory state plus the 6x6 fundamental matrix in canonical coordinates."""
    s: CanonicalState
    Z: np.ndarray
    t: float

    @staticmethod
    def initial(state):
        if isinstance(state, State6):
            state = state.to_canonical()
        return VariationalBundle(state, np.eye(6), 0.0)


@dataclass(frozen=True)
class CrossingEvent:
    t_cross: float
    state_at_cross: State6
    index: int


def _pack(state, z):
    y = np.empty(42)
    y[:6] = state
    y[6:] = z.reshape(36)
    return y


_STATUS_ERRORS = {
    K.COLLISION: CollisionProximity,
    K.STEP_UNDERFLOW: StepSizeUnderflow,
    K.MAX_STEPS: MaxStepsExceeded,
}


def _raise_status(status, context):
    exc = _STATUS_ERRORS.get(status)
    if exc is not None:
        raise exc(context)


def rkf78_step(model, y, h, cfg=IntegratorConfig()):
    """One accepted step from y with trial size h.

    Retries with smaller h until the mixed abs/rel error test passes, then
    proposes h_next = h * clamp(0.9 * (tol/err)^(1/8), 0.2, 5).  Returns
    (y_new, h_used, h_next, err_inf) with err_inf the raw infinity-norm of
    the embedded error estimate.
    """
    y = np.asarray(y, dtype=float)
    nvar = y.size
    ks = np.empty((13, nvar))
    ytmp = np.empty(nvar)
    ynew = np.empty(nvar)
    errv = np.empty(nvar)
    rejected = False
    while True:
        emax, rmin = K.rkf78_step(model.kind, model.mu, y, h, nvar,
                                  cfg.rel_tol, cfg.abs_tol, ks, ytmp, ynew, errv)
        if rmin < K.COLLISION_RADIUS:
            raise CollisionProximity("stage evaluation inside guard radius")
        if emax <= 1.0:
            break
        h_new = K._controller(h, emax, True)
        if h_new < cfg.h_min:
            raise StepSizeUnderflow(f"h = {h_new:.3e} below h_min with err ratio {emax:.3e}")
        h = h_new
        rejected = True
    h_next = min(max(K._controller(h, emax, rejected), cfg.h_min), cfg.h_max)
    return ynew, h, h_next, float(np.max(np.abs(errv)))


def state_derivative(model, y):
    """RHS of the 6-state or 42-bundle vector, guard included."""
    y = np.asarray(y, dtype=float)
    out = np.empty(y.size)
    rmin = K.rhs(model.kind, model.mu, y, y.size, out)
    if rmin < K.COLLISION_RADIUS:
        raise CollisionProximity("derivative requested inside guard radius")
    return out


def hermite_dense(f1, f2, df1, df2, dt, ell1):
    """Two-point cubic Hermite interpolant, evaluated at ell1.

    ell1 = (t - t2)/(t1 - t2) runs from 1 at the step start t1 down to 0 at
    the step end t2 = t1 + dt; values and first derivatives are matched at
    both endpoints.
    """
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    df1 = np.asarray(df1, dtype=float)
    df2 = np.asarray(df2, dtype=float)
    s = 1.0 - ell1
    h00 = 2.0 * s**3 - 3.0 * s**2 + 1.0
    h10 = s**3 - 2.0 * s**2 + s
    h01 = -2.0 * s**3 + 3.0 * s**2
    h11 = s**3 - s**2
    return h00 * f1 + h10 * dt * df1 + h01 * f2 + h11 * dt * df2


def _hermite_coeffs_ell(f1, f2, df1, df2, dt):
    """Cubic coefficients (c3, c2, c1, c0) of one component in the ell1 variable."""
    a3 = 2.0 * (f1 - f2) + dt * (df1 + df2)
    a2 = -3.0 * f1 + 3.0 * f2 - dt * (2.0 * df1 + df2)
    a1 = dt * df1
    a0 = f1
    # substitute s = 1 - ell
    c3 = -a3
    c2 = 3.0 * a3 + a2
    c1 = -3.0 * a3 - 2.0 * a2 - a1
    c0 = a3 + a2 + a1 + a0
    return c3, c2, c1, c0


_ROOT_PAD = 1e-12


def cubic_root_in_unit_interval(c3, c2, c1, c0):
    """Real root of c3 x^3 + c2 x^2 + c1 x + c0 inside (0, 1), closed form.

    When several roots lie inside, the largest is returned: ell1 decreases
    with time, so the largest root is the earliest crossing of the step.
    """
    scale = max(abs(c3), abs(c2), abs(c1), abs(c0))
    if scale == 0.0:
        raise NoRootInInterval("identically zero cubic")
    roots = []
    if abs(c3) <= 1e-14 * scale:
        if abs(c2) <= 1e-14 * scale:
            if abs(c1) <= 1e-14 * scale:
                raise NoRootInInterval("constant interpolant")
            roots.append(-c0 / c1)
        else:
            disc = c1 * c1 - 4.0 * c2 * c0
            if disc >= 0.0:
                sq = math.sqrt(disc)
                # numerically stable pair
                qq = -0.5 * (c1 + math.copysign(sq, c1))
                roots.append(qq / c2)
                if qq != 0.0:
                    roots.append(c0 / qq)
            elif disc > -1e-12 * scale * scale:
                roots.append(-0.5 * c1 / c2)
    else:
        a = c2 / c3
        b = c1 / c3
        c = c0 / c3
        q = (a * a - 3.0 * b) / 9.0
        r = (2.0 * a**3 - 9.0 * a * b + 27.0 * c) / 54.0
        if r * r < q**3:
            th = math.acos(max(-1.0, min(1.0, r / math.sqrt(q**3))))
            sq = -2.0 * math.sqrt(q)
            roots.append(sq * math.cos(th / 3.0) - a / 3.0)
            roots.append(sq * math.cos((th + 2.0 * math.pi) / 3.0) - a / 3.0)
            roots.append(sq * math.cos((th - 2.0 * math.pi) / 3.0) - a / 3.0)
        else:
            big = -math.copysign((abs(r) + math.sqrt(r * r - q**3)) ** (1.0 / 3.0), r)
            small = 0.0 if big == 0.0 else q / big
            roots.append(big + small - a / 3.0)

    interior = [x for x in roots if _ROOT_PAD < x < 1.0 - _ROOT_PAD]
    if interior:
        return max(interior)
    boundary = [min(1.0, max(0.0, x)) for x in roots
                if -_ROOT_PAD <= x <= 1.0 + _ROOT_PAD]
    if boundary:
        return max(boundary)
    raise NoRootInInterval(f"no real root of cubic in (0,1); roots {roots}")


def _bisect_cubic(c3, c2, c1, c0):
    """Bisection fallback on the interpolant when the closed form finds nothing."""
    def p(x):
        return ((c3 * x + c2) * x + c1) * x + c0

    lo, hi = 0.0, 1.0
    plo, phi = p(lo), p(hi)
    if plo == 0.0:
        return lo
    if phi == 0.0:
        return hi
    if plo * phi > 0.0:
        raise NoRootInInterval("interpolant has equal signs at both step endpoints")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        pm = p(mid)
        if pm == 0.0:
            return mid
        if plo * pm < 0.0:
            hi = mid
        else:
            lo, plo = mid, pm
    return 0.5 * (lo + hi)


def hermite_crossing_estimate(model, t1, y1, t2, y2):
    """First crossing estimate from the Hermite cubic of the step.

    Returns (t_cross, y_cross) with y_cross the full interpolated vector
    (state, and bundle columns when y has 42 components).
    """
    dt = t2 - t1
    d1 = state_derivative(model, y1)
    d2 = state_derivative(model, y2)
    coeffs = _hermite_coeffs_ell(y1[1], y2[1], d1[1], d2[1], dt)
    try:
        ell = cubic_root_in_unit_interval(*coeffs)
    except NoRootInInterval:
        ell = _bisect_cubic(*coeffs)
    t_cross = t2 - ell * dt
    y_cross = hermite_dense(y1, y2, d1, d2, dt, ell)
    return t_cross, y_cross


_NEWTON_POLISH = 2


def refine_crossing(model, t1, y1, t2, y2, cfg=None):
    """Refine a bracketed xi2 crossing to integration accuracy.

    The Hermite cubic of the step provides the starting time; the partial
    step is then re-integrated and polished with a fixed pair of Newton
    corrections in time, so the returned state lies on the true flow and
    carries |xi2| at roundoff rather than at interpolation error.  The
    correction count is fixed to keep the map smooth in the initial values.
    """
    cfg = cfg or IntegratorConfig()
    t_est, y_est = hermite_crossing_estimate(model, t1, y1, t2, y2)
    if t_est <= t1:
        return t_est, y_est
    nvar = y1.size

    def flow_to(t_target):
        status, y, _, _ = K.propagate_to_time(
            model.kind, model.mu, y1, nvar, t_target - t1,
            cfg.rel_tol, cfg.abs_tol, min(cfg.h_init, t_target - t1),
            cfg.h_min, cfg.h_max, cfg.max_steps)
        _raise_status(status, "crossing refinement")
        return y

    t_lo, t_hi = t1, t2
    y_cross = flow_to(t_est)
    for _ in range(_NEWTON_POLISH):
        v2 = y_cross[4]
        if v2 == 0.0:
            break
        t_new = t_est - y_cross[1] / v2
        t_new = min(max(t_new, t_lo), t_hi)
        if t_new <= t1 or t_new == t_est:
            break
        t_est = t_new
        y_cross = flow_to(t_est)
    return t_est, y_cross


def propagate_to_nth_crossing(model, state0, n_target, cfg=IntegratorConfig(),
                              t_max=math.inf, with_variational=True):
    """Propagate to the n_target-th strict sign change of xi2 after t = 0.

    A start on the xi1-xi3 plane is not counted.  Returns (CrossingEvent,
    VariationalBundle at the crossing, hdrift); the bundle carries the
    identity-seeded fundamental matrix when with_variational is set and the
    final interpolated Z otherwise equals the identity.
    """
    if n_target < 1:
        raise ValueError("n_target must be >= 1")
    if isinstance(state0, State6):
        state0 = state0.as_array()
    state0 = np.asarray(state0, dtype=float)
    nvar = 42 if with_variational else 6
    y0 = _pack(state0, np.eye(6)) if with_variational else state0.copy()

    status, t1, y1, t2, y2, count, _, hdrift, _ = K.propagate_crossings(
        model.kind, model.mu, y0, nvar, n_target, t_max,
        cfg.rel_tol, cfg.abs_tol, cfg.h_init, cfg.h_min, cfg.h_max, cfg.max_steps)
    _raise_status(status, f"propagation stopped after {count} crossings")
    if status == K.NO_CROSSING:
        raise CrossingNotFound(
            f"only {count} of {n_target} crossings before t_max = {t_max}")

    t_cross, y_cross = refine_crossing(model, t1, y1, t2, y2, cfg=cfg)
    state = State6.from_array(y_cross[:6])
    event = CrossingEvent(t_cross=t_cross, state_at_cross=state, index=n_target)
    z = y_cross[6:].reshape(6, 6) if with_variational else np.eye(6)
    bundle = VariationalBundle(state.to_canonical(), z, t_cross)
    return event, bundle, hdrift


def propagate_to_time(model, state0, t_target, cfg=IntegratorConfig(),
                      with_variational=False):
    """Propagate to exactly t_target.  Returns (state or (state, Z), hdrift)."""
    if isinstance(state0, State6):
        state0 = state0.as_array()
    state0 = np.asarray(state0, dtype=float)
    nvar = 42 if with_variational else 6
    y0 = _pack(state0, np.eye(6)) if with_variational else state0.copy()
    status, y, hdrift, _ = K.propagate_to_time(
        model.kind, model.mu, y0, nvar, t_target,
        cfg.rel_tol, cfg.abs_tol, cfg.h_init, cfg.h_min, cfg.h_max, cfg.max_steps)
    _raise_status(status, f"propagation to t = {t_target}")
    if with_variational:
        return (y[:6], y[6:].reshape(6, 6)), hdrift
    return y, hdrift


def count_crossings_until(model, state0, t_end, cfg=IntegratorConfig()):
    """Number of strict xi2 sign changes in (0, t_end]; diagnostic helper."""
    if isinstance(state0, State6):
        state0 = state0.as_array()
    y0 = np.asarray(state0, dtype=float).copy()
    status, _, _, _, _, count, _, _, _ = K.propagate_crossings(
        model.kind, model.mu, y0, 6, 10**9, t_end,
        cfg.rel_tol, cfg.abs_tol, cfg.h_init, cfg.h_min, cfg.h_max, cfg.max_steps)
    _raise_status(status, "crossing count propagation")
    return count
