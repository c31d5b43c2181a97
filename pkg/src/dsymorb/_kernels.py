"""Numba kernels for the rotating-frame models and the RKF7(8) propagator.

Everything in here works on raw float64 arrays so the hot loops compile to
machine code.  The public wrappers in dynamics.py / integrator.py add the
domain types, guards and exceptions.

State layout: y[0:3] = position, y[3:6] = velocity (rotating frame).  A
variational bundle appends the 6x6 fundamental matrix in canonical
coordinates, flattened row-major, for a 42-component vector.
"""

import numpy as np
from numba import njit

# model ids
CRTBP_BARY = 0    # barycentric rotating frame, masses 1-mu at (mu,0,0), mu at (mu-1,0,0)
CRTBP_M2 = 1      # m2-centred rotating frame, mass mu at origin, 1-mu at (1,0,0)
HILL = 2          # Hill's lunar problem
KEPLER_ROT = 3    # central mass mu at the origin, rotating frame (approximate system)
HARMONIC = 4      # test field: acceleration = -position, no rotation terms
POLY_SHIFT = 5    # test field: y_i' = y_{i+1}, polynomial solutions

COLLISION_RADIUS = 1e-6

# propagation status codes
OK = 0
NO_CROSSING = 1
COLLISION = 2
STEP_UNDERFLOW = 3
MAX_STEPS = 4

# Fehlberg 7(8) tableau, 13 stages.
_C78 = np.array([0.0, 2.0 / 27.0, 1.0 / 9.0, 1.0 / 6.0, 5.0 / 12.0, 0.5,
                 5.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0, 1.0, 0.0, 1.0])

_A78 = np.zeros((13, 13))
_A78[1, 0] = 2.0 / 27.0
_A78[2, 0:2] = (1.0 / 36.0, 1.0 / 12.0)
_A78[3, 0:3] = (1.0 / 24.0, 0.0, 1.0 / 8.0)
_A78[4, 0:4] = (5.0 / 12.0, 0.0, -25.0 / 16.0, 25.0 / 16.0)
_A78[5, 0:5] = (1.0 / 20.0, 0.0, 0.0, 0.25, 0.2)
_A78[6, 0:6] = (-25.0 / 108.0, 0.0, 0.0, 125.0 / 108.0, -65.0 / 27.0, 125.0 / 54.0)
_A78[7, 0:7] = (31.0 / 300.0, 0.0, 0.0, 0.0, 61.0 / 225.0, -2.0 / 9.0, 13.0 / 900.0)
_A78[8, 0:8] = (2.0, 0.0, 0.0, -53.0 / 6.0, 704.0 / 45.0, -107.0 / 9.0, 67.0 / 90.0, 3.0)
_A78[9, 0:9] = (-91.0 / 108.0, 0.0, 0.0, 23.0 / 108.0, -976.0 / 135.0, 311.0 / 54.0,
                -19.0 / 60.0, 17.0 / 6.0, -1.0 / 12.0)
_A78[10, 0:10] = (2383.0 / 4100.0, 0.0, 0.0, -341.0 / 164.0, 4496.0 / 1025.0,
                  -301.0 / 82.0, 2133.0 / 4100.0, 45.0 / 82.0, 45.0 / 164.0, 18.0 / 41.0)
_A78[11, 0:11] = (3.0 / 205.0, 0.0, 0.0, 0.0, 0.0, -6.0 / 41.0, -3.0 / 205.0,
                  -3.0 / 41.0, 3.0 / 41.0, 6.0 / 41.0, 0.0)
_A78[12, 0:12] = (-1777.0 / 4100.0, 0.0, 0.0, -341.0 / 164.0, 4496.0 / 1025.0,
                  -289.0 / 82.0, 2193.0 / 4100.0, 51.0 / 82.0, 33.0 / 164.0,
                  12.0 / 41.0, 0.0, 1.0)

# 7th-order weights; the 8th-order pair differs only through k0, k10, k11, k12,
# which collapses the error estimate to h*(41/840)*(k0 + k10 - k11 - k12).
_B78 = np.array([41.0 / 840.0, 0.0, 0.0, 0.0, 0.0, 34.0 / 105.0, 9.0 / 35.0,
                 9.0 / 35.0, 9.0 / 280.0, 9.0 / 280.0, 41.0 / 840.0, 0.0, 0.0])
_ERRW = 41.0 / 840.0


@njit(cache=True)
def grad_potential(model, mu, x, y, z):
    """Gradient of the effective potential W plus the smallest body distance.

    Returns (g1, g2, g3, W, rmin).  The equations of motion in the rotating
    frame are  a1 = 2*v2 + x - g1,  a2 = -2*v1 + y - g2,  a3 = -g3.
    """
    if model == CRTBP_BARY:
        d1x = x - mu
        d2x = x - (mu - 1.0)
        r1 = np.sqrt(d1x * d1x + y * y + z * z)
        r2 = np.sqrt(d2x * d2x + y * y + z * z)
        m1 = 1.0 - mu
        c1 = m1 / (r1 * r1 * r1)
        c2 = mu / (r2 * r2 * r2)
        g1 = c1 * d1x + c2 * d2x
        g2 = (c1 + c2) * y
        g3 = (c1 + c2) * z
        w = -m1 / r1 - mu / r2
        rmin = min(r1, r2)
    elif model == CRTBP_M2:
        r = np.sqrt(x * x + y * y + z * z)
        dx = x - 1.0
        rho = np.sqrt(dx * dx + y * y + z * z)
        m1 = 1.0 - mu
        c = mu / (r * r * r)
        cp = m1 / (rho * rho * rho)
        g1 = c * x + m1 + cp * dx
        g2 = c * y + cp * y
        g3 = c * z + cp * z
        w = -mu / r + m1 * (x - 1.0 / rho) - 0.5 * m1 * m1
        rmin = min(r, rho)
    elif model == HILL:
        r = np.sqrt(x * x + y * y + z * z)
        c = 1.0 / (r * r * r)
        g1 = c * x - 2.0 * x
        g2 = c * y + y
        g3 = c * z + z
        w = -1.0 / r - 1.5 * x * x + 0.5 * (x * x + y * y + z * z)
        rmin = r
    else:
        r = np.sqrt(x * x + y * y + z * z)
        c = mu / (r * r * r)
        g1 = c * x
        g2 = c * y
        g3 = c * z
        w = -mu / r
        rmin = r
    return g1, g2, g3, w, rmin


@njit(cache=True)
def hess_potential(model, mu, x, y, z):
    """3x3 Hessian of the effective potential W (row-major) and rmin."""
    h = np.zeros((3, 3))
    if model == CRTBP_BARY:
        rmin = 1e300
        for body in range(2):
            if body == 0:
                m = 1.0 - mu
                dx = x - mu
            else:
                m = mu
                dx = x - (mu - 1.0)
            r2 = dx * dx + y * y + z * z
            r = np.sqrt(r2)
            rmin = min(rmin, r)
            c3 = m / (r2 * r)
            c5 = 3.0 * m / (r2 * r2 * r)
            h[0, 0] += c3 - c5 * dx * dx
            h[1, 1] += c3 - c5 * y * y
            h[2, 2] += c3 - c5 * z * z
            h[0, 1] += -c5 * dx * y
            h[0, 2] += -c5 * dx * z
            h[1, 2] += -c5 * y * z
    elif model == CRTBP_M2:
        rmin = 1e300
        for body in range(2):
            if body == 0:
                m = mu
                dx = x
            else:
                m = 1.0 - mu
                dx = x - 1.0
            r2 = dx * dx + y * y + z * z
            r = np.sqrt(r2)
            rmin = min(rmin, r)
            c3 = m / (r2 * r)
            c5 = 3.0 * m / (r2 * r2 * r)
            h[0, 0] += c3 - c5 * dx * dx
            h[1, 1] += c3 - c5 * y * y
            h[2, 2] += c3 - c5 * z * z
            h[0, 1] += -c5 * dx * y
            h[0, 2] += -c5 * dx * z
            h[1, 2] += -c5 * y * z
    else:
        gm = 1.0 if model == HILL else mu
        r2 = x * x + y * y + z * z
        r = np.sqrt(r2)
        rmin = r
        c3 = gm / (r2 * r)
        c5 = 3.0 * gm / (r2 * r2 * r)
        h[0, 0] = c3 - c5 * x * x
        h[1, 1] = c3 - c5 * y * y
        h[2, 2] = c3 - c5 * z * z
        h[0, 1] = -c5 * x * y
        h[0, 2] = -c5 * x * z
        h[1, 2] = -c5 * y * z
        if model == HILL:
            h[0, 0] += -2.0
            h[1, 1] += 1.0
            h[2, 2] += 1.0
    h[1, 0] = h[0, 1]
    h[2, 0] = h[0, 2]
    h[2, 1] = h[1, 2]
    return h, rmin


@njit(cache=True)
def rhs(model, mu, y, nvar, out):
    """Time derivative of a 6-state or 42-bundle vector.  Returns rmin."""
    if model == HARMONIC:
        for i in range(3):
            out[i] = y[3 + i]
            out[3 + i] = -y[i]
        return 1e300
    if model == POLY_SHIFT:
        for i in range(nvar - 1):
            out[i] = y[i + 1]
        out[nvar - 1] = 0.0
        return 1e300

    g1, g2, g3, _, rmin = grad_potential(model, mu, y[0], y[1], y[2])
    out[0] = y[3]
    out[1] = y[4]
    out[2] = y[5]
    out[3] = 2.0 * y[4] + y[0] - g1
    out[4] = -2.0 * y[3] + y[1] - g2
    out[5] = -g3

    if nvar == 42:
        hw, _ = hess_potential(model, mu, y[0], y[1], y[2])
        # canonical-coordinate variational flow:
        #   dZ[0:3] = K Z[0:3] + Z[3:6],  dZ[3:6] = -hw Z[0:3] + K Z[3:6]
        # with K = [[0,1,0],[-1,0,0],[0,0,0]].
        for jj in range(6):
            z0 = y[6 + jj]
            z1 = y[12 + jj]
            z2 = y[18 + jj]
            z3 = y[24 + jj]
            z4 = y[30 + jj]
            z5 = y[36 + jj]
            out[6 + jj] = z1 + z3
            out[12 + jj] = -z0 + z4
            out[18 + jj] = z5
            out[24 + jj] = -(hw[0, 0] * z0 + hw[0, 1] * z1 + hw[0, 2] * z2) + z4
            out[30 + jj] = -(hw[1, 0] * z0 + hw[1, 1] * z1 + hw[1, 2] * z2) - z3
            out[36 + jj] = -(hw[2, 0] * z0 + hw[2, 1] * z1 + hw[2, 2] * z2)
    return rmin


@njit(cache=True)
def hamiltonian(model, mu, y):
    """Rotating-frame Hamiltonian evaluated on a 6-state."""
    if model == HARMONIC:
        return 0.5 * (y[3] ** 2 + y[4] ** 2 + y[5] ** 2
                      + y[0] ** 2 + y[1] ** 2 + y[2] ** 2)
    if model == POLY_SHIFT:
        return 0.0
    e1 = y[3] - y[1]
    e2 = y[4] + y[0]
    e3 = y[5]
    _, _, _, w, _ = grad_potential(model, mu, y[0], y[1], y[2])
    return 0.5 * (e1 * e1 + e2 * e2 + e3 * e3) - (y[0] * e2 - y[1] * e1) + w


@njit(cache=True)
def rkf78_stages(model, mu, y, h, nvar, ks, ytmp):
    """Fill the 13 stage derivatives.  Returns the smallest body distance seen."""
    rmin_all = 1e300
    for s in range(13):
        for q in range(nvar):
            acc = 0.0
            for j in range(s):
                a = _A78[s, j]
                if a != 0.0:
                    acc += a * ks[j, q]
            ytmp[q] = y[q] + h * acc
        rm = rhs(model, mu, ytmp, nvar, ks[s])
        if rm < rmin_all:
            rmin_all = rm
    return rmin_all


@njit(cache=True)
def rkf78_step(model, mu, y, h, nvar, rtol, atol, ks, ytmp, ynew, errv):
    """One trial step.  Fills ynew/errv, returns (err_ratio, rmin)."""
    rmin = rkf78_stages(model, mu, y, h, nvar, ks, ytmp)
    emax = 0.0
    for q in range(nvar):
        acc = 0.0
        for s in range(13):
            b = _B78[s]
            if b != 0.0:
                acc += b * ks[s, q]
        ynew[q] = y[q] + h * acc
        e = h * _ERRW * (ks[0, q] + ks[10, q] - ks[11, q] - ks[12, q])
        errv[q] = e
        sc = atol + rtol * max(abs(y[q]), abs(ynew[q]))
        r = abs(e) / sc
        if r > emax:
            emax = r
    return emax, rmin


@njit(cache=True)
def _controller(h, emax, rejected):
    if emax > 0.0:
        fac = 0.9 * emax ** (-0.125)
    else:
        fac = 5.0
    if fac < 0.2:
        fac = 0.2
    elif fac > 5.0:
        fac = 5.0
    if rejected and fac > 1.0:
        fac = 1.0
    return h * fac


@njit(cache=True)
def update_crossing_count(s_prev, xi2_new):
    """Sign bookkeeping for strict crossings of the xi2 = 0 plane.

    s_prev is the reference sign (+1/-1), 0.0 immediately after an exact node
    (or at a start on the plane, which is never counted).  Returns
    (s_next, counted).
    """
    if xi2_new == 0.0:
        # landing exactly on a node counts once; the next nonzero endpoint
        # re-seeds the sign without counting again
        if s_prev == 0.0:
            return 0.0, 0
        return 0.0, 1
    if s_prev == 0.0:
        return (1.0 if xi2_new > 0.0 else -1.0), 0
    if s_prev * xi2_new < 0.0:
        return -s_prev, 1
    return s_prev, 0


@njit(cache=True)
def propagate_crossings(model, mu, y0, nvar, n_strict, t_max,
                        rtol, atol, h_init, h_min, h_max, max_steps):
    """Advance until the n_strict-th strict sign change of xi2 after t=0.

    Returns (status, t1, y1, t2, y2, count, h_last, hdrift, nsteps) where
    [t1, t2] brackets the final crossing when status == OK.  hdrift is the
    largest relative Hamiltonian deviation seen at accepted steps.
    """
    y = y0.copy()
    t = 0.0
    ks = np.empty((13, nvar))
    ytmp = np.empty(nvar)
    ynew = np.empty(nvar)
    errv = np.empty(nvar)
    y1 = y0.copy()
    y2 = y0.copy()
    t1 = 0.0
    t2 = 0.0
    count = 0
    nsteps = 0
    h = min(h_init, h_max)
    s_prev = 0.0
    if y[1] > 0.0:
        s_prev = 1.0
    elif y[1] < 0.0:
        s_prev = -1.0
    h0 = hamiltonian(model, mu, y)
    hscale = max(abs(h0), 1e-30)
    hdrift = 0.0

    while t < t_max:
        if h > t_max - t:
            h = t_max - t
        rejected = False
        while True:
            emax, rmin = rkf78_step(model, mu, y, h, nvar, rtol, atol,
                                    ks, ytmp, ynew, errv)
            if rmin < COLLISION_RADIUS:
                return COLLISION, t1, y1, t2, y2, count, h, hdrift, nsteps
            if emax <= 1.0:
                break
            h_new = _controller(h, emax, True)
            if h_new < h_min:
                return STEP_UNDERFLOW, t1, y1, t2, y2, count, h, hdrift, nsteps
            h = h_new
            rejected = True
        nsteps += 1
        if nsteps > max_steps:
            return MAX_STEPS, t1, y1, t2, y2, count, h, hdrift, nsteps
        t_new = t + h
        s_next, counted = update_crossing_count(s_prev, ynew[1])
        if counted == 1:
            count += 1
            if count == n_strict:
                t1 = t
                t2 = t_new
                for q in range(nvar):
                    y1[q] = y[q]
                    y2[q] = ynew[q]
                dh = abs(hamiltonian(model, mu, ynew) - h0) / hscale
                if dh > hdrift:
                    hdrift = dh
                return OK, t1, y1, t2, y2, count, h, hdrift, nsteps
        s_prev = s_next
        t = t_new
        for q in range(nvar):
            y[q] = ynew[q]
        dh = abs(hamiltonian(model, mu, y) - h0) / hscale
        if dh > hdrift:
            hdrift = dh
        h_next = _controller(h, emax, rejected)
        h = min(max(h_next, h_min), h_max)

    return NO_CROSSING, t1, y1, t2, y2, count, h, hdrift, nsteps


@njit(cache=True)
def propagate_to_time(model, mu, y0, nvar, t_target,
                      rtol, atol, h_init, h_min, h_max, max_steps):
    """Advance to exactly t_target.  Returns (status, y, hdrift, nsteps)."""
    y = y0.copy()
    t = 0.0
    ks = np.empty((13, nvar))
    ytmp = np.empty(nvar)
    ynew = np.empty(nvar)
    errv = np.empty(nvar)
    nsteps = 0
    h = min(h_init, h_max)
    h0 = hamiltonian(model, mu, y)
    hscale = max(abs(h0), 1e-30)
    hdrift = 0.0

    while t < t_target:
        last = False
        if h >= t_target - t:
            h = t_target - t
            last = True
        rejected = False
        while True:
            emax, rmin = rkf78_step(model, mu, y, h, nvar, rtol, atol,
                                    ks, ytmp, ynew, errv)
            if rmin < COLLISION_RADIUS:
                return COLLISION, y, hdrift, nsteps
            if emax <= 1.0:
                break
            h_new = _controller(h, emax, True)
            if h_new < h_min:
                return STEP_UNDERFLOW, y, hdrift, nsteps
            h = h_new
            rejected = True
            last = False
        nsteps += 1
        if nsteps > max_steps:
            return MAX_STEPS, y, hdrift, nsteps
        t = t_target if last else t + h
        for q in range(nvar):
            y[q] = ynew[q]
        dh = abs(hamiltonian(model, mu, y) - h0) / hscale
        if dh > hdrift:
            hdrift = dh
        h_next = _controller(h, emax, rejected)
        h = min(max(h_next, h_min), h_max)

    return OK, y, hdrift, nsteps
