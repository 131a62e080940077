import math

import pytest

from src.scattering import SquareWell, solve_zero_energy

SQUARE_WELL_A = 1.0 - math.tanh(1.0)


@pytest.fixture(scope='session')
def square_well():
    return SquareWell(depth=2.0, radius=1.0)


@pytest.fixture(scope='session')
def square_well_solution(square_well):
    return solve_zero_energy(square_well, r_max=3.0)


@pytest.fixture
def minimal_config_text():
    return "[potential]\nkind = square_well\ndepth = 2.0\nradius = 1.0\n\n[system]\nn_particles = 100\n"
