"""Monodromy composition from quarter-period data and linear stability.

For a doubly-symmetric orbit the full-period fundamental matrix follows
from the quarter-period one by conjugation with the two diagonal
time-reversing reflections in canonical coordinates.  Writing S1 for the
reflection fixing the start subplane and S2 for the one fixing the
quarter-period subplane, the reversor identity D(flow_t)(x) =
S D(flow_-t)(Sx) S applied at the two symmetry points gives

    Z(T/2) = S2 Z(T/4)^-1 S2 Z(T/4),
    Z(T)   = (S1 Z(T/4)^-1 S2 Z(T/4))^2,

so an L1 start uses (R1 Z^-1 R2 Z)^2 and an L2 start (R2 Z^-1 R1 Z)^2.
The operator order matters for spatial orbits; this form is pinned by the
requirement that the spectrum agree with the directly integrated
full-period fundamental matrix.

The inverse uses the symplectic identity Z^-1 = -J Z^T J, exact for
symplectic Z and far better conditioned than LU for long orbits.
"""

import enum
from dataclasses import dataclass

import numpy as np

# reflections acting on canonical coordinates (xi, eta)
REFLECT_SYZYGY = np.diag([1.0, -1.0, -1.0, -1.0, 1.0, 1.0])
REFLECT_VERTICAL = np.diag([1.0, -1.0, 1.0, -1.0, 1.0, -1.0])

_J6 = np.block([[np.zeros((3, 3)), np.eye(3)],
                [-np.eye(3), np.zeros((3, 3))]])

SYMPLECTIC_DEFECT_LIMIT = 1e-6
STABILITY_MARGIN = 1e-4
MARGINAL_BAND = 1e-2


class Classification(str, enum.Enum):
    LINEARLY_STABLE = "LinearlyStable"
    UNSTABLE = "Unstable"
    INDETERMINATE = "Indeterminate"


def symplectic_defect(z):
    """Infinity norm of Z^T J Z - J."""
    z = np.asarray(z, dtype=float)
    return float(np.max(np.abs(z.T @ _J6 @ z - _J6)))


def symplectic_inverse(z):
    """Inverse of a symplectic matrix via -J Z^T J."""
    z = np.asarray(z, dtype=float)
    return -_J6 @ z.T @ _J6


def monodromy_from_quarter(z_quarter, start_plane):
    """Full-period monodromy from the quarter-period fundamental matrix.

    start_plane is "L1" or "L2" (or anything with a .value of those).
    Returns (Z_T, flagged): flagged marks a quarter matrix whose symplectic
    defect exceeded the trust limit, in which case an LU inverse was used.
    """
    z = np.asarray(z_quarter, dtype=float)
    plane = getattr(start_plane, "value", start_plane)
    defect = symplectic_defect(z)
    flagged = defect > SYMPLECTIC_DEFECT_LIMIT
    zinv = np.linalg.inv(z) if flagged else symplectic_inverse(z)
    if plane == "L1":
        half = REFLECT_SYZYGY @ zinv @ REFLECT_VERTICAL @ z
    elif plane == "L2":
        half = REFLECT_VERTICAL @ zinv @ REFLECT_SYZYGY @ z
    else:
        raise ValueError(f"unknown start plane {start_plane!r}")
    return half @ half, flagged


def eigenvalues_6x6(m):
    """Eigenvalues of a real 6x6 matrix, sorted by descending modulus.

    Backed by LAPACK's Hessenberg reduction and shifted QR; conjugate pairs
    come out exact because the real Schur form is used underneath.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (6, 6):
        raise ValueError("expected a 6x6 matrix")
    vals = np.linalg.eigvals(m)
    order = np.argsort(-np.abs(vals), kind="stable")
    return vals[order]


def stability_index(multipliers):
    """Sum of the multiplier moduli.

    Equal to the usual sum of |lambda_i| + 1/|lambda_i| over the three
    reciprocal pairs, without having to pair a numerical spectrum; at least 6,
    with equality exactly when the whole spectrum sits on the unit circle.
    """
    mults = np.asarray(multipliers, dtype=complex)
    return float(np.sum(np.abs(mults)))


def classify(z_t, multipliers, rho, flagged=False):
    """Linear-stability verdict from the trace pre-test and the index.

    The trace test carries the same numerical margin as the index: a
    marginally elliptic monodromy can land at trace = 6 + roundoff without
    being hyperbolic.
    """
    if flagged:
        return Classification.INDETERMINATE
    if float(np.trace(np.asarray(z_t, dtype=float))) > 6.0 + STABILITY_MARGIN:
        return Classification.UNSTABLE
    if rho < 6.0 + STABILITY_MARGIN:
        return Classification.LINEARLY_STABLE
    return Classification.UNSTABLE


@dataclass
class MonodromyResult:
    Z_T: np.ndarray
    multipliers: np.ndarray
    rho: float
    trace: float
    classification: Classification
    sympl_defect: float
    flagged: bool
    marginal: bool

    @staticmethod
    def from_quarter(z_quarter, start_plane):
        defect = symplectic_defect(z_quarter)
        z_t, flagged = monodromy_from_quarter(z_quarter, start_plane)
        mults = eigenvalues_6x6(z_t)
        rho = stability_index(mults)
        cls = classify(z_t, mults, rho, flagged=flagged)
        marginal = 6.0 + STABILITY_MARGIN <= rho <= 6.0 + MARGINAL_BAND
        return MonodromyResult(Z_T=z_t, multipliers=mults, rho=rho,
                               trace=float(np.trace(z_t)),
                               classification=cls, sympl_defect=defect,
                               flagged=flagged, marginal=marginal)
