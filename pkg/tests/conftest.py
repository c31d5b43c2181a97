import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dsymorb import Model, ShootingProblem, solve_case, spec_from_cos2i

import refdata


@pytest.fixture(scope="session")
def copenhagen_model():
    return Model.crtbp_barycentric(0.5)


def make_problem(regime, k, j, case, mu, cos2i, t_max_factor=8.0):
    spec = spec_from_cos2i(regime, k, j, case, mu=mu, cos2i=cos2i)
    return ShootingProblem.from_seed(spec, t_max_factor=t_max_factor)


@pytest.fixture(scope="session")
def comet_k2_problem():
    """Shooting problem holding an orbit confirmed to high accuracy."""
    problem, _ = make_problem("comet", 2, 0, "1+--",
                              refdata.MU_COPENHAGEN, refdata.COS2I_COMET)
    x = np.array(refdata.COMET_ROWS[3][3])
    return problem, x


SOLVE_WALL_TIME = {}


@pytest.fixture(scope="session")
def solved_records():
    """Continuations of the seven equal-mass reference rows, solved once."""
    import time
    t0 = time.monotonic()
    out = []
    for k, j, case, *_ in refdata.COMET_ROWS:
        spec = spec_from_cos2i("comet", k, j, case,
                               mu=refdata.MU_COPENHAGEN, cos2i=refdata.COS2I_COMET)
        out.append(solve_case(spec, t_max_factor=8.0))
    SOLVE_WALL_TIME["equal_mass_rows"] = time.monotonic() - t0
    return out


def random_states(n, lo=0.5, hi=20.0, seed=0):
    """Random 6-states with body distances on a controlled annulus."""
    rng = np.random.default_rng(seed)
    states = []
    while len(states) < n:
        pos = rng.normal(size=3)
        pos *= rng.uniform(lo, hi) / np.linalg.norm(pos)
        vel = rng.normal(size=3)
        states.append(np.concatenate([pos, vel]))
    return states
