import math

import numpy as np
import pytest

from src.errors import InvalidArgumentError
from src.scattering import (FourierCache, ScaledPotential, SquareWell, TabulatedPotential,
                            born_second_order_continuum, born_terms, correlation_transform, eta_coefficients,
                            fourier_transform_radial, load_grid_file, solve_zero_energy)

from conftest import SQUARE_WELL_A


def test_square_well_closed_form(square_well):
    assert square_well.exact_scattering_length() == pytest.approx(SQUARE_WELL_A, rel=1e-15)
    assert SQUARE_WELL_A == pytest.approx(0.2384058, abs=1e-7)


def test_scattering_length_both_estimates(square_well_solution):
    solution = square_well_solution
    assert solution.a_integral == pytest.approx(SQUARE_WELL_A, rel=1e-8)
    assert solution.a_asymptotic == pytest.approx(SQUARE_WELL_A, rel=1e-8)
    assert abs(solution.a_integral - solution.a_asymptotic) <= 1e-6
    assert solution.residual <= 1e-10


def test_profile_shape(square_well_solution):
    solution = square_well_solution
    assert abs(solution.u[0]) <= 1e-14
    assert np.all(np.diff(solution.f[solution.grid > 0]) >= -1e-14)
    outside = solution.grid > 1.0
    np.testing.assert_allclose(solution.f[outside], 1.0 - SQUARE_WELL_A / solution.grid[outside], atol=1e-8)
    assert solution.profile(2.5) == pytest.approx(2.5 - SQUARE_WELL_A, abs=1e-8)


def test_inside_profile_matches_sinh(square_well_solution):
    # u ∝ sinh(r) for V = 2 on [0, 1], normalized to u'(1) = 1
    r = np.linspace(0.05, 1.0, 20)
    expected = np.sinh(r) / math.cosh(1.0)
    np.testing.assert_allclose(square_well_solution.profile(r), expected, rtol=1e-8)


def test_zero_potential_has_zero_length():
    solution = solve_zero_energy(SquareWell(depth=0.0, radius=1.0), r_max=2.0)
    assert solution.scattering_length == pytest.approx(0.0, abs=1e-14)
    np.testing.assert_allclose(solution.f[1:], 1.0, atol=1e-12)


def test_hard_core_limit_approaches_radius():
    solution = solve_zero_energy(SquareWell(depth=1e4, radius=1.0), r_max=2.0)
    assert solution.scattering_length == pytest.approx(1.0 - 1.0 / math.sqrt(5e3), rel=1e-8)


def test_r_max_must_exceed_support(square_well):
    with pytest.raises(InvalidArgumentError):
        solve_zero_energy(square_well, r_max=1.0)


def test_tabulated_square_well_agrees(square_well):
    tabulated = TabulatedPotential((0.0, 0.5, 1.0), (2.0, 2.0, 2.0))
    solution = solve_zero_energy(tabulated, r_max=3.0)
    assert solution.scattering_length == pytest.approx(SQUARE_WELL_A, rel=1e-8)
    assert tabulated.fourier(0.0) == pytest.approx(square_well.fourier(0.0), rel=1e-14)
    assert tabulated.fourier(3.7) == pytest.approx(square_well.fourier(3.7), rel=1e-8)


def test_tabulated_validation():
    with pytest.raises(InvalidArgumentError):
        TabulatedPotential((0.1, 1.0), (1.0, 1.0))
    with pytest.raises(InvalidArgumentError):
        TabulatedPotential((0.0, 1.0), (1.0, -1.0))
    with pytest.raises(InvalidArgumentError):
        TabulatedPotential((0.0, 1.0, 2.0), (1.0, 1.0, 1.0), support=1.0)


def test_grid_file_loading(tmp_path):
    path = tmp_path / "well.txt"
    path.write_text("# r V\n0.0 2.0\n0.5 2.0\n1.0 2.0\n")
    potential = load_grid_file(str(path))
    assert potential.support_radius == 1.0
    with pytest.raises(InvalidArgumentError):
        load_grid_file(str(tmp_path / "missing.txt"))


def test_first_born_term_is_one_third(square_well):
    terms = born_terms(square_well, 50)
    assert terms.a0 == pytest.approx(1.0 / 3.0, rel=1e-15)
    assert terms.a1 < 0


def test_second_born_sum_threads_and_tail(square_well):
    one = born_terms(square_well, 200, threads=1)
    four = born_terms(square_well, 200, threads=4)
    assert one.a1 == four.a1
    larger = born_terms(square_well, 800)
    assert abs(larger.a1 - one.a1) <= one.tail_bound


def test_second_born_box_scale_tends_to_continuum(square_well):
    continuum = born_second_order_continuum(square_well)
    assert continuum == pytest.approx(-2.0 / 15.0, rel=1e-14)
    unit = born_terms(square_well, 400)
    large = born_terms(square_well, 400, box_scale=4.0)
    assert abs(large.a1 - continuum) < abs(unit.a1 - continuum)


def test_continuum_quadrature_matches_closed_form():
    tabulated = TabulatedPotential((0.0, 0.5, 1.0), (2.0, 2.0, 2.0))
    assert born_second_order_continuum(tabulated) == pytest.approx(-2.0 / 15.0, rel=1e-6)


@pytest.mark.slow
def test_born_series_convergence_slope():
    base = SquareWell(depth=2.0, radius=1.0)
    a0, a1 = 1.0 / 3.0, born_second_order_continuum(base)
    lambdas = [2.0 ** -k for k in range(4, 11)]
    remainders = []
    for lam in lambdas:
        a = solve_zero_energy(ScaledPotential(lam, base), r_max=3.0).scattering_length
        remainders.append(abs(a - lam * a0 - lam * lam * a1))
    slope = np.polyfit(np.log(lambdas), np.log(remainders), 1)[0]
    assert slope >= 2.7


def test_fourier_cache_hits_and_eviction(square_well):
    cache = FourierCache(max_size=2)
    value = fourier_transform_radial(square_well, 1.5, cache=cache)
    assert fourier_transform_radial(square_well, 1.5, cache=cache) == value
    assert cache.hits == 1 and cache.misses == 1
    fourier_transform_radial(square_well, 2.5, cache=cache)
    fourier_transform_radial(square_well, 3.5, cache=cache)
    assert len(cache) == 2
    assert cache.get(square_well, 1.5) is None
    with pytest.raises(InvalidArgumentError):
        fourier_transform_radial(square_well, -1.0)


def test_correlation_transform_small_momentum(square_well_solution):
    # w = 1 − f behaves like a/r outside the support, so W(k) → 4πa/k² for k → 0
    k = 1e-3
    assert correlation_transform(square_well_solution, k) * k * k == pytest.approx(4 * math.pi * SQUARE_WELL_A,
                                                                                   rel=1e-4)


def test_eta_coefficients(square_well_solution):
    table = eta_coefficients(square_well_solution, 10, 6)
    assert sorted(table.values) == [1, 2, 3, 4, 5, 6]
    assert all(v < 0 for v in table.values.values())
    assert abs(table.value(1)) > abs(table.value(6))
    with pytest.raises(InvalidArgumentError):
        table.value(7)
    assert eta_coefficients(square_well_solution, 10, 6, threads=4).values == table.values
