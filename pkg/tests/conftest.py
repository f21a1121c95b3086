"""Shared fixtures: canonical problem families and cached expensive solves."""

import numpy as np
import pytest

from fracstates.grid import Field, make_grid
from fracstates.models import NonlinearitySpec, PotentialSpec, Well, sample_potential
from fracstates.solver import SolveOptions, solve_limit
from fracstates.variational import Problem


CANON_S = 0.4  # saturable parameter: l0 = 2.5
CANON_ALPHA = 0.5


def single_well_potential():
    """Canonical single well: background 2, depth 1, width 2, center 1/3.

    The off-grid center keeps the rescaled minimum exactly one third of a
    cell away from the grid at every canonical epsilon, so the V(eta)-V0 gap
    scales cleanly with epsilon.
    """
    return PotentialSpec(2.0, (Well((1.0 / 3.0,), 1.0, 2.0),))


def double_well_potential(depths=(1.0, 1.0)):
    return PotentialSpec(
        2.0, (Well((-2.0,), depths[0], 0.5), Well((2.0,), depths[1], 0.5))
    )


@pytest.fixture(scope="session")
def saturable():
    return NonlinearitySpec.saturable(CANON_S)


@pytest.fixture(scope="session")
def limit_state(saturable):
    """Ground state of the limit problem at a = V0 = 1 on the R=80 box."""
    g = make_grid(1, 80.0, 640)
    return solve_limit(1.0, saturable, g, CANON_ALPHA, SolveOptions(max_iter=20000))


@pytest.fixture(scope="session")
def small_problem(saturable):
    """Small 1-D problem on the canonical single well at eps = 0.25."""
    g = make_grid(1, 20.0, 256)
    vf = sample_potential(single_well_potential(), g, 0.25)
    return Problem(
        grid=g, alpha=CANON_ALPHA, eps=0.25, potential_field=vf, nonlinearity=saturable
    )


def gaussian_field(grid, width, center=None, amplitude=1.0):
    r2 = np.zeros(grid.shape)
    for i, c in enumerate(grid.coords):
        ci = 0.0 if center is None else center[i]
        r2 += (c - ci) ** 2
    return Field(grid, amplitude * np.exp(-r2 / (2.0 * width**2)))


def random_theta_field(problem, rng, width_range=(2.0, 5.0)):
    """Random positive bump guaranteed inside the restricted set."""
    from fracstates.variational import theta_defect

    for _ in range(100):
        width = rng.uniform(*width_range)
        center = rng.uniform(-problem.grid.R / 4, problem.grid.R / 4, problem.grid.d)
        amp = rng.uniform(0.5, 3.0)
        u = gaussian_field(problem.grid, width, center, amp)
        bumps = 1.0 + 0.3 * np.sin(rng.uniform(0, 2 * np.pi) + problem.grid.coords[0] / width)
        u = Field(problem.grid, u.values * bumps.ravel())
        if theta_defect(problem, u) < 0:
            return u
    raise AssertionError("could not draw an admissible random field")
