"""Broyden's method with QR-factored secant updates and a backtracking
line search, for small square systems.

The approximate Jacobian starts from forward differences and is carried as
Q, R factors; each secant update B <- B + w s^T (w the update defect,
s = dx/|dx|^2, so the secant condition holds exactly) is folded into the
factors with Givens rotations.  A stall or rank-deficient R triggers one
fresh finite-difference restart before the solve is declared failed.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (LineSearchStall, MaxIterExceeded, NonDescentDirection,
                     SingularJacobian)

_SQRT_EPS = math.sqrt(np.finfo(float).eps)
_STPMX = 100.0
_TOLX = 1e-13
_ARMIJO = 1e-4
_R_TINY = 1e-14
_RANK_RTOL = 1e-9


@dataclass
class SolverConfig:
    tol_inf: float = 1e-10
    max_iter: int = 200
    max_backtracks: int = 10
    restart_on_stall: bool = True

    def __post_init__(self):
        if self.tol_inf <= 0.0:
            raise ValueError("tol_inf must be positive")


@dataclass
class BroydenState:
    """Current iterate and QR factors of the approximate Jacobian."""
    x: np.ndarray
    q: np.ndarray
    r: np.ndarray
    f_val: float
    iter: int


@dataclass
class SolveDiagnostics:
    iterations: int = 0
    restarts: int = 0
    backtracks: int = 0
    residual_evals: int = 0
    final_merit: float = math.inf
    final_inf_norm: float = math.inf
    converged: bool = False
    failure: str = ""
    history: list = field(default_factory=list)
    state: BroydenState = None


def fd_jacobian(fn, x, f0=None, step_scale=1.0):
    """Forward-difference Jacobian with steps sqrt(eps)*max(|x_i|, 1)."""
    x = np.asarray(x, dtype=float)
    if f0 is None:
        f0 = np.asarray(fn(x), dtype=float)
    m = x.size
    jac = np.empty((f0.size, m))
    for i in range(m):
        h = step_scale * _SQRT_EPS * max(abs(x[i]), 1.0)
        xt = x.copy()
        xt[i] = x[i] + h
        h = xt[i] - x[i]  # keep the step exactly representable
        jac[:, i] = (np.asarray(fn(xt), dtype=float) - f0) / h
    return jac


def qr_rank_one_update(q, r, w, s):
    """Return (q', r') with q' r' = q r + w s^T, via 2(m-1) Givens rotations."""
    q = np.array(q, dtype=float)
    r = np.array(r, dtype=float)
    w = np.asarray(w, dtype=float)
    s = np.asarray(s, dtype=float)
    m = r.shape[0]
    u = q.T @ w
    # chase u to a multiple of e1
    k = m - 1
    while k > 0 and u[k] == 0.0:
        k -= 1
    for i in range(k - 1, -1, -1):
        _rotate(q, r, i, u[i], -u[i + 1])
        if u[i] == 0.0:
            u[i] = abs(u[i + 1])
        else:
            u[i] = math.hypot(u[i], u[i + 1])
    r[0, :] += u[0] * s
    # restore triangularity
    for i in range(k):
        _rotate(q, r, i, r[i, i], -r[i + 1, i])
    return q, r


def _rotate(q, r, i, a, b):
    """Givens rotation of rows i, i+1 of r (and columns of q)."""
    if a == 0.0:
        c = 0.0
        s = math.copysign(1.0, b)
    elif abs(a) > abs(b):
        f = b / a
        c = math.copysign(1.0 / math.sqrt(1.0 + f * f), a)
        s = f * c
    else:
        f = a / b
        s = math.copysign(1.0 / math.sqrt(1.0 + f * f), b)
        c = f * s
    ri = c * r[i, :] - s * r[i + 1, :]
    r[i + 1, :] = s * r[i, :] + c * r[i + 1, :]
    r[i, :] = ri
    qi = c * q[:, i] - s * q[:, i + 1]
    q[:, i + 1] = s * q[:, i] + c * q[:, i + 1]
    q[:, i] = qi


def line_search(phi0, slope, evaluator, max_backtracks=10, lam_min=0.0):
    """Backtracking line search on the merit function.

    evaluator(lam) returns the merit at step fraction lam (math.inf marks a
    failed trial).  The first trial is the full step; an insufficient
    decrease triggers the quadratic model lam = -slope/(2*(phi1-phi0-slope)),
    then cubic backtracks clamped into [0.1, 0.5] of the previous lam.
    Returns (lam, phi, trials, stalled).
    """
    if slope >= 0.0:
        raise NonDescentDirection(f"slope {slope:.3e} is not negative")
    trials = []
    lam = 1.0
    lam_prev = phi_prev = None
    for _ in range(max_backtracks + 1):
        phi = evaluator(lam)
        trials.append((lam, phi))
        if phi <= phi0 + _ARMIJO * lam * slope:
            return lam, phi, trials, False
        if lam < lam_min:
            return lam, phi, trials, True
        if lam_prev is None:
            denom = phi - phi0 - slope
            lam_new = 0.5 if denom == 0.0 or not math.isfinite(denom) \
                else -slope / (2.0 * denom)
        else:
            rhs1 = phi - phi0 - lam * slope
            rhs2 = phi_prev - phi0 - lam_prev * slope
            if not (math.isfinite(rhs1) and math.isfinite(rhs2)):
                lam_new = 0.5 * lam
            else:
                a = (rhs1 / lam**2 - rhs2 / lam_prev**2) / (lam - lam_prev)
                b = (-lam_prev * rhs1 / lam**2 + lam * rhs2 / lam_prev**2) \
                    / (lam - lam_prev)
                if a == 0.0:
                    lam_new = -slope / (2.0 * b)
                else:
                    disc = b * b - 3.0 * a * slope
                    if disc < 0.0:
                        lam_new = 0.5 * lam
                    elif b <= 0.0:
                        lam_new = (-b + math.sqrt(disc)) / (3.0 * a)
                    else:
                        lam_new = -slope / (b + math.sqrt(disc))
                if not math.isfinite(lam_new) or lam_new > 0.5 * lam:
                    lam_new = 0.5 * lam
        lam_prev, phi_prev = lam, phi
        lam = max(lam_new, 0.1 * lam)
    return lam_prev, phi_prev, trials, True


def broyden_solve(fn, x0, cfg=None, jac_fn=None, callback=None):
    """Drive fn(x) to |fn|_inf <= cfg.tol_inf from x0.

    fn maps an m-vector to an m-vector; trial evaluations may raise, which
    the line search treats as infinitely bad.  Returns (x, diagnostics); on
    failure raises SingularJacobian / LineSearchStall / MaxIterExceeded with
    the diagnostics attached.
    """
    cfg = cfg or SolverConfig()
    if jac_fn is None:
        jac_fn = lambda x, f0: fd_jacobian(fn, x, f0)
    diag = SolveDiagnostics()

    x = np.array(x0, dtype=float)
    m = x.size

    def evaluate(xt):
        diag.residual_evals += 1
        return np.asarray(fn(xt), dtype=float)

    fvec = evaluate(x)
    fval = 0.5 * float(fvec @ fvec)
    fnorm = float(np.max(np.abs(fvec)))
    diag.history.append((0, fnorm))
    if fnorm <= cfg.tol_inf:
        diag.converged = True
        diag.final_merit = fval
        diag.final_inf_norm = fnorm
        return x, diag

    stpmax = _STPMX * max(float(np.linalg.norm(x)), float(m))
    restart = True
    fresh = False

    for it in range(1, cfg.max_iter + 1):
        diag.iterations = it
        if restart:
            b = jac_fn(x, fvec)
            q, r = np.linalg.qr(b)
            fresh = True
            restart = False

        grad = r.T @ (q.T @ fvec)  # gradient of the merit, B^T f
        rdiag = np.abs(np.diag(r))
        if rdiag.max() < _R_TINY:
            diag.failure = "approximate Jacobian vanished"
            raise SingularJacobian(diag.failure, diag)
        if rdiag.min() < _RANK_RTOL * rdiag.max():
            # numerically rank deficient, e.g. a residual component that is
            # an event defect pinned near zero: take the minimum-norm step
            # over the well-conditioned row space instead of amplifying noise
            p = np.linalg.lstsq(q @ r, -fvec, rcond=_RANK_RTOL)[0]
        else:
            try:
                p = np.linalg.solve(r, -(q.T @ fvec))
            except np.linalg.LinAlgError:
                if fresh:
                    diag.failure = "singular triangular factor"
                    raise SingularJacobian(diag.failure, diag)
                restart = True
                diag.restarts += 1
                continue
        pnorm = float(np.linalg.norm(p))
        if pnorm > stpmax:
            p *= stpmax / pnorm
        slope = float(grad @ p)
        if slope >= 0.0:
            if fresh or not cfg.restart_on_stall:
                diag.failure = "no descent direction with a fresh Jacobian"
                raise NonDescentDirection(diag.failure, diag)
            restart = True
            diag.restarts += 1
            continue

        lam_min = _TOLX / float(np.max(np.abs(p) / np.maximum(np.abs(x), 1.0)))
        xold, fold_vec, fold = x, fvec, fval
        box = {}

        def merit_at(lam):
            xt = xold + lam * p
            try:
                ft = evaluate(xt)
            except Exception:
                return math.inf
            if not np.all(np.isfinite(ft)):
                return math.inf
            box[lam] = ft
            return 0.5 * float(ft @ ft)

        lam, fval_new, trials, stalled = line_search(
            fold, slope, merit_at, cfg.max_backtracks, lam_min)
        diag.backtracks += max(len(trials) - 1, 0)

        if stalled or lam not in box:
            if fresh or not cfg.restart_on_stall:
                diag.final_merit = fold
                diag.final_inf_norm = float(np.max(np.abs(fold_vec)))
                diag.failure = "line search stalled on a fresh Jacobian"
                raise LineSearchStall(diag.failure, diag)
            restart = True
            diag.restarts += 1
            continue

        x = xold + lam * p
        fvec = box[lam]
        fval = fval_new
        fnorm = float(np.max(np.abs(fvec)))
        diag.history.append((it, fnorm))
        if callback is not None:
            callback(it, x, fvec)
        if fnorm <= cfg.tol_inf:
            diag.converged = True
            diag.final_merit = fval
            diag.final_inf_norm = fnorm
            diag.state = BroydenState(x=x, q=q, r=r, f_val=fval, iter=it)
            return x, diag
        if lam < 0.1 and not fresh and cfg.restart_on_stall:
            # a deeply backtracked step means the secant model has gone
            # stale; refresh it from finite differences at the new point
            restart = True
            diag.restarts += 1
            continue

        dx = x - xold
        if float(np.max(np.abs(dx) / np.maximum(np.abs(x), 1.0))) < _TOLX:
            if fresh or not cfg.restart_on_stall:
                diag.final_merit = fval
                diag.final_inf_norm = fnorm
                diag.failure = "iterates stopped moving above tolerance"
                raise LineSearchStall(diag.failure, diag)
            restart = True
            diag.restarts += 1
            continue

        # secant update B <- B + w s^T with s = dx/|dx|^2
        df = fvec - fold_vec
        w = df - q @ (r @ dx)
        noise = np.finfo(float).eps * (np.abs(fvec) + np.abs(fold_vec))
        w[np.abs(w) < noise] = 0.0
        if np.any(w != 0.0):
            q, r = qr_rank_one_update(q, r, w, dx / float(dx @ dx))
            if np.min(np.abs(np.diag(r))) < _R_TINY:
                restart = True
                diag.restarts += 1
                continue
        fresh = False

    diag.final_merit = fval
    diag.final_inf_norm = fnorm
    diag.failure = f"no convergence in {cfg.max_iter} iterations"
    raise MaxIterExceeded(diag.failure, diag)
