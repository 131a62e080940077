import math

import numpy as np
import pytest

from src import bogoliubov_formulas
from src.bogoliubov_formulas import (CUBE_CUTOFF_AVERAGE, RICHARDSON, DispersionModel, bogoliubov_tau,
                                     correction_sum, correction_summand, cube_partial_sums, dispersion,
                                     dispersion_curve, e_lambda, ground_state_energy, quad_diagonalize)
from src.errors import DomainError, InvalidArgumentError, NumericError
from src.momentum_lattice import TWO_PI_SQ, enumerate_shells

from conftest import SQUARE_WELL_A

# e_Λ at M_max = 200 with the cube-cutoff average
E_LAMBDA_REFERENCE = 10.413629


def test_free_dispersion_is_p_squared():
    model = DispersionModel.free()
    assert dispersion(model, 3) == 3 * TWO_PI_SQ
    assert model.integer_keyed


def test_gross_pitaevskii_dispersion_value():
    model = DispersionModel.gross_pitaevskii(0.25)
    p2 = TWO_PI_SQ
    assert dispersion(model, 1) == pytest.approx(math.sqrt(p2 * p2 + 4.0 * math.pi * p2), rel=1e-15)
    assert not model.integer_keyed
    assert DispersionModel.gross_pitaevskii(0.0).integer_keyed


def test_dispersion_rejects_invalid_input():
    with pytest.raises(InvalidArgumentError):
        DispersionModel.gross_pitaevskii(-0.1)
    with pytest.raises(InvalidArgumentError):
        dispersion(DispersionModel.free(), 0)
    with pytest.raises(InvalidArgumentError):
        DispersionModel('quartic')


def test_mean_field_negative_radicand():
    model = DispersionModel.mean_field(lambda p: -1e6)
    with pytest.raises(DomainError):
        model.energy(1)


def test_mean_field_reduces_to_gross_pitaevskii_for_constant_v_hat():
    a = 0.3
    mean_field = DispersionModel.mean_field(lambda p: 8.0 * math.pi * a)
    gp = DispersionModel.gross_pitaevskii(a)
    for k in (1, 2, 5, 9):
        assert mean_field.energy(k) == pytest.approx(gp.energy(k), rel=1e-14)


def test_dispersion_curve_skips_empty_shells():
    rows = dispersion_curve(DispersionModel.free(), enumerate_shells(8))
    assert [k for k, _, _ in rows] == [1, 2, 3, 4, 5, 6, 8]


def test_phonon_linearity_over_six_decades():
    # E(p)/(|p|√(16πa)) = √(1 + p²/16πa) falls monotonically to 1 in the phonon regime p² ≪ 16πa
    shell = 1
    p_abs = math.sqrt(TWO_PI_SQ * shell)
    ratios = []
    for a in np.logspace(2, 8, 13):
        ratios.append(dispersion(DispersionModel.gross_pitaevskii(a), shell) / (p_abs * math.sqrt(16 * math.pi * a)))
    assert all(later < earlier for earlier, later in zip(ratios, ratios[1:]))
    assert ratios[-1] == pytest.approx(1.0, abs=1e-6)


def test_quad_diagonalize_two_mode():
    result = quad_diagonalize(2.0, 1.0)
    assert result.eps == pytest.approx(math.sqrt(3.0), rel=1e-15)
    assert result.ground_shift == pytest.approx(math.sqrt(3.0) - 2.0, rel=1e-14)
    assert math.tanh(2.0 * result.tau) == pytest.approx(-0.5, rel=1e-14)


@pytest.mark.parametrize("A, B", [(1.0, 1.0), (1.0, -2.0), (0.0, 0.0)])
def test_quad_diagonalize_domain(A, B):
    with pytest.raises(DomainError):
        quad_diagonalize(A, B)


def test_quad_diagonalize_without_pairing():
    result = quad_diagonalize(3.0, 0.0)
    assert result.tau == 0.0
    assert result.eps == 3.0
    assert result.ground_shift == 0.0


def test_bogoliubov_tau_sign_and_decay():
    taus = [bogoliubov_tau(SQUARE_WELL_A, k) for k in (1, 2, 10)]
    assert all(t < 0 for t in taus)
    assert abs(taus[0]) > abs(taus[1]) > abs(taus[2])
    assert bogoliubov_tau(0.0, 1) == 0.0


def test_cube_partial_sums_first_terms():
    partial = cube_partial_sums(2)
    assert partial[0] == 0.0
    # the surface of the unit cube holds 6 vectors with |n|² = 1, 12 with 2, 8 with 3
    expected = 6 * math.cos(1.0) + 12 * math.cos(math.sqrt(2)) / 2 + 8 * math.cos(math.sqrt(3)) / 3
    assert partial[1] == pytest.approx(expected, rel=1e-14)


def _direct_cube_sum(M):
    m = np.arange(-M, M + 1)
    n1, n2, n3 = np.meshgrid(m, m, m, indexing='ij')
    k = (n1 * n1 + n2 * n2 + n3 * n3).astype(float).ravel()
    k = k[k > 0]
    return float(np.sum(np.cos(np.sqrt(k)) / k))


@pytest.mark.parametrize("M", [5, 12])
def test_cube_partial_sums_match_direct_sum(M):
    partial = cube_partial_sums(12)
    assert partial[M] == pytest.approx(_direct_cube_sum(M), rel=1e-12)


def test_cube_partial_sums_pinned_value():
    assert cube_partial_sums(12)[12] == pytest.approx(-6.118029785909675, rel=1e-12)


@pytest.mark.filterwarnings("error")
def test_cube_partial_sums_raise_no_warnings():
    cube_partial_sums(4)


def test_e_lambda_rejects_small_cutoff():
    with pytest.raises(InvalidArgumentError):
        e_lambda(10)
    with pytest.raises(InvalidArgumentError):
        e_lambda(40, scheme='cesaro')


@pytest.mark.slow
def test_e_lambda_schemes_agree():
    result = e_lambda(200, CUBE_CUTOFF_AVERAGE)
    values = result.values_by_scheme
    assert abs(values[CUBE_CUTOFF_AVERAGE] - values[RICHARDSON]) <= 1e-3
    other = e_lambda(200, RICHARDSON)
    assert other.value == values[RICHARDSON]


def test_e_lambda_rejects_spread_beyond_own_errors(monkeypatch):
    schemes = {CUBE_CUTOFF_AVERAGE: lambda partial, M: 0.0, RICHARDSON: lambda partial, M: 1e-5}
    monkeypatch.setattr(bogoliubov_formulas, '_SCHEMES', schemes)
    with pytest.raises(NumericError):
        e_lambda(20)


@pytest.mark.slow
def test_e_lambda_regression_value():
    result = e_lambda(200)
    assert abs(result.value - E_LAMBDA_REFERENCE) <= result.error_estimate
    assert result.error_estimate < 1e-4


@pytest.mark.slow
def test_e_lambda_stable_under_cutoff_doubling():
    coarse = e_lambda(100)
    fine = e_lambda(400)
    assert abs(coarse.value - fine.value) <= coarse.error_estimate
    assert fine.error_estimate <= coarse.error_estimate


def test_correction_summand_asymptote():
    a = SQUARE_WELL_A
    c = 8.0 * math.pi * a
    for k in (51, 80, 200, 1000):
        p2 = TWO_PI_SQ * k
        assert correction_summand(a, p2) == pytest.approx(-c ** 3 / (2.0 * p2 * p2), rel=0.01)


def test_correction_summand_matches_direct_formula():
    a = SQUARE_WELL_A
    c = 8.0 * math.pi * a
    p2 = TWO_PI_SQ
    direct = p2 + c - math.sqrt(p2 * p2 + 2.0 * c * p2) - c * c / (2.0 * p2)
    assert correction_summand(a, p2) == pytest.approx(direct, rel=1e-10)


def test_correction_sum_tail_bound_holds_for_nested_cutoffs():
    a = SQUARE_WELL_A
    reference = correction_sum(a, 1600).value
    for K in (25, 50, 100, 200, 400):
        truncated = correction_sum(a, K)
        assert truncated.value <= reference
        assert reference - truncated.value <= truncated.tail_bound


def test_correction_sum_thread_independent():
    one = correction_sum(SQUARE_WELL_A, 300, threads=1)
    four = correction_sum(SQUARE_WELL_A, 300, threads=4)
    assert one.value == four.value
    assert one.partial_values == four.partial_values


def test_ground_state_energy_assembly():
    breakdown = ground_state_energy(100, SQUARE_WELL_A, 1.5, -0.02, tail_bound=1e-4)
    assert breakdown.term_main == pytest.approx(4 * math.pi * 99 * SQUARE_WELL_A)
    assert breakdown.term_boundary == pytest.approx(1.5 * SQUARE_WELL_A ** 2)
    assert breakdown.total == breakdown.term_main + breakdown.term_boundary + breakdown.term_correction
    assert breakdown.to_dict()['tail_bound'] == 1e-4


def test_ground_state_energy_zero_length():
    correction = correction_sum(0.0, 50)
    breakdown = ground_state_energy(10, 0.0, 1.5, correction.value)
    assert breakdown.total == 0.0
    assert correction.tail_bound == 0.0


def test_ground_state_energy_needs_two_particles():
    with pytest.raises(InvalidArgumentError):
        ground_state_energy(1, 0.1, 1.0, 0.0)
