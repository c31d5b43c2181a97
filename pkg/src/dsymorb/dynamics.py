"""Rotating-frame models: vector fields, Hamiltonians and variational flow.

Three models share one structure,  H = |eta|^2/2 - (xi1*eta2 - xi2*eta1) + W(xi),
with conjugate momenta eta1 = v1 - xi2, eta2 = v2 + xi1, eta3 = v3:

* barycentric CRTBP  (masses 1-mu at (mu,0,0) and mu at (mu-1,0,0)),
* m2-centred CRTBP   (mass mu at the origin, 1-mu at (1,0,0)),
* Hill's lunar problem.

A rotating two-body model (central mass only) is included as the approximate
system that the seeds close in exactly.

Variational dynamics are propagated in canonical coordinates (xi, eta) so the
diagonal reflection matrices of the monodromy composition and the symplectic
inverse apply without basis changes; the multipliers agree with the
velocity-coordinate formulation up to elementary transforms.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import CollisionProximity

COLLISION_RADIUS = K.COLLISION_RADIUS


@dataclass(frozen=True)
class State6:
    """Rotating-frame position and velocity of the massless body."""
    xi1: float
    xi2: float
    xi3: float
    v1: float
    v2: float
    v3: float

    def as_array(self):
        return np.array([self.xi1, self.xi2, self.xi3, self.v1, self.v2, self.v3])

    @staticmethod
    def from_array(y):
        return State6(*(float(c) for c in y))

    def to_canonical(self):
        return CanonicalState(self.xi1, self.xi2, self.xi3,
                              self.v1 - self.xi2, self.v2 + self.xi1, self.v3)


@dataclass(frozen=True)
class CanonicalState:
    """Position and conjugate momenta (eta1 = v1 - xi2, eta2 = v2 + xi1, eta3 = v3)."""
    xi1: float
    xi2: float
    xi3: float
    eta1: float
    eta2: float
    eta3: float

    def as_array(self):
        return np.array([self.xi1, self.xi2, self.xi3,
                         self.eta1, self.eta2, self.eta3])

    @staticmethod
    def from_array(y):
        return CanonicalState(*(float(c) for c in y))

    def to_state(self):
        return State6(self.xi1, self.xi2, self.xi3,
                      self.eta1 + self.xi2, self.eta2 - self.xi1, self.eta3)


class Model:
    """Identifies one dynamical model and its parameter."""

    __slots__ = ("kind", "mu")

    def __init__(self, kind, mu=0.0):
        if kind in (K.CRTBP_BARY, K.CRTBP_M2) and not 0.0 < mu < 1.0:
            raise ValueError(f"CRTBP mass ratio must satisfy 0 < mu < 1, got {mu}")
        if kind == K.KEPLER_ROT and mu <= 0.0:
            raise ValueError("central mass must be positive")
        self.kind = kind
        self.mu = float(mu)

    @staticmethod
    def crtbp_barycentric(mu):
        return Model(K.CRTBP_BARY, mu)

    @staticmethod
    def crtbp_m2_centered(mu):
        return Model(K.CRTBP_M2, mu)

    @staticmethod
    def hill_lunar():
        return Model(K.HILL, 0.0)

    @staticmethod
    def rotating_kepler(gm=1.0):
        return Model(K.KEPLER_ROT, gm)

    def __repr__(self):
        names = {K.CRTBP_BARY: "CrtbpBarycentric", K.CRTBP_M2: "CrtbpM2Centered",
                 K.HILL: "HillLunar", K.KEPLER_ROT: "RotatingKepler"}
        name = names.get(self.kind, f"Model{self.kind}")
        if self.kind == K.HILL:
            return f"Model({name})"
        return f"Model({name}, mu={self.mu})"

    def __eq__(self, other):
        return (isinstance(other, Model) and self.kind == other.kind
                and self.mu == other.mu)

    def __hash__(self):
        return hash((self.kind, self.mu))


def _check_distance(model, y):
    _, _, _, _, rmin = K.grad_potential(model.kind, model.mu, y[0], y[1], y[2])
    if rmin < COLLISION_RADIUS:
        raise CollisionProximity(
            f"distance {rmin:.3e} below guard radius {COLLISION_RADIUS:.0e}")


def vector_field(model, y):
    """Time derivative (v, a) of a 6-state in the rotating frame."""
    y = np.asarray(y, dtype=float)
    out = np.empty(6)
    rmin = K.rhs(model.kind, model.mu, y, 6, out)
    if rmin < COLLISION_RADIUS:
        raise CollisionProximity(
            f"distance {rmin:.3e} below guard radius {COLLISION_RADIUS:.0e}")
    return out


def hamiltonian(model, y):
    """Rotating-frame Hamiltonian (constant along exact trajectories)."""
    y = np.asarray(y, dtype=float)
    _check_distance(model, y)
    return float(K.hamiltonian(model.kind, model.mu, y))


def variational_matrix(model, y):
    """Jacobian A of the canonical flow field at the given 6-state.

    A = [[Kr, I], [-W_hess, Kr]] with Kr = [[0,1,0],[-1,0,0],[0,0,0]]; the
    second derivatives of W are hard-coded closed forms.
    """
    y = np.asarray(y, dtype=float)
    _check_distance(model, y)
    hw, _ = K.hess_potential(model.kind, model.mu, y[0], y[1], y[2])
    a = np.zeros((6, 6))
    a[0, 1] = 1.0
    a[1, 0] = -1.0
    a[3, 4] = 1.0
    a[4, 3] = -1.0
    a[0:3, 3:6] = np.eye(3)
    a[3:6, 0:3] = -hw
    return a


def variational_rhs(model, y, z):
    """Derivative A(y) @ z of the fundamental matrix along the trajectory."""
    return variational_matrix(model, y) @ np.asarray(z, dtype=float)


def canonical_field(model, c):
    """Flow field in canonical coordinates (xi, eta); used by oracle tests."""
    c = np.asarray(c, dtype=float)
    s = CanonicalState.from_array(c).to_state().as_array()
    d = vector_field(model, s)
    return np.array([d[0], d[1], d[2],
                     d[3] - s[4], d[4] + s[3], d[5]])


def m2_frame_shift(y, mu):
    """Barycentric state -> m2-centred state (positions shift by (1-mu,0,0))."""
    y = np.asarray(y, dtype=float)
    out = y.copy()
    out[0] = y[0] + (1.0 - mu)
    return out


def m2_frame_unshift(q, mu):
    """Inverse of m2_frame_shift; exact round trip."""
    q = np.asarray(q, dtype=float)
    out = q.copy()
    out[0] = q[0] - (1.0 - mu)
    return out


# time-reversing reflections acting on 6-states (xi, v)
def reflect_syzygy(y):
    """Reflection about the xi1 axis composed with time reversal."""
    y = np.asarray(y, dtype=float)
    return np.array([y[0], -y[1], -y[2], -y[3], y[4], y[5]])


def reflect_vertical_plane(y):
    """Reflection about the xi1-xi3 plane composed with time reversal."""
    y = np.asarray(y, dtype=float)
    return np.array([y[0], -y[1], y[2], -y[3], y[4], -y[5]])
