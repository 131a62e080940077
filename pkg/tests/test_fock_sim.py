import math

import numpy as np
import pytest

from src.bogoliubov_formulas import quad_diagonalize
from src.config_manager import FockConfig
from src.errors import InvalidArgumentError, ResourceError
from src.fock_sim import (A, A_DAG, B, B_ETA, B_TAU, CUBIC_A, CUBIC_ATILDE, EXACT_EXPM, EXCITATION_TRUNCATED,
                          FIXED_TOTAL, TRUNCATED_BCH, GeneratorSpec, LocalizationProfile, ModeSet,
                          SimulationSettings, build_basis, build_cubic_CN, build_generator, build_hamiltonian,
                          conjugate, exact_spectrum, excitation_map, generator_spec, ladder_ops,
                          localization_ops, partition_defect, run_pipeline, stars_and_bars, word_operator)
from src.fock_sim.basis import count_states
from src.momentum_lattice import LatticeVector
from src.report_writer import read_operator, write_operator

E1 = LatticeVector.of(1, 0, 0)
E2 = LatticeVector.of(0, 1, 0)
E12 = LatticeVector.of(1, 1, 0)
PAIR = (E1, -E1)
SQUARE = (E1, -E1, E2, -E2)


def _two_mode_hamiltonian(basis):
    terms = [(2.0, [(p, A_DAG), (p, A)]) for p in PAIR]
    terms.append((1.0, [(E1, A_DAG), (-E1, A_DAG)]))
    terms.append((1.0, [(-E1, A), (E1, A)]))
    return word_operator(basis, terms, label='H2')


@pytest.fixture(scope='module')
def pair_basis():
    return build_basis(ModeSet.from_vectors(PAIR), 40, EXCITATION_TRUNCATED, mode_cap=20)


@pytest.mark.parametrize("modes, N", [(SQUARE, 3), (PAIR, 5), (SQUARE + (E12, -E12), 2)])
def test_basis_dimensions(modes, N):
    excitations = ModeSet.from_vectors(modes)
    plus = build_basis(excitations, N, EXCITATION_TRUNCATED)
    full = build_basis(excitations.with_zero(), N, FIXED_TOTAL)
    assert plus.dimension == stars_and_bars(len(modes), N, EXCITATION_TRUNCATED)
    assert full.dimension == stars_and_bars(len(modes) + 1, N, FIXED_TOTAL)
    assert plus.dimension == full.dimension


def test_basis_cap_and_sector_checks():
    excitations = ModeSet.from_vectors(SQUARE)
    with pytest.raises(ResourceError):
        build_basis(excitations, 10, EXCITATION_TRUNCATED, max_dimension=100)
    with pytest.raises(InvalidArgumentError):
        build_basis(excitations, 3, FIXED_TOTAL)
    with pytest.raises(InvalidArgumentError):
        build_basis(excitations.with_zero(), 3, EXCITATION_TRUNCATED)
    assert count_states(2, 40, EXCITATION_TRUNCATED, mode_cap=20) == 21 * 21


def test_mode_set_puts_zero_first():
    modes = ModeSet((E1, LatticeVector.of(0, 0, 0), -E1))
    assert modes.modes[0].is_zero
    assert modes.pairing_closed
    assert not ModeSet((E1, E2)).pairing_closed
    with pytest.raises(InvalidArgumentError):
        ModeSet((E1, E1))


@pytest.mark.parametrize("prefactor, expected", [('sqrt', 1.0), ('strict', 1.0 / math.sqrt(4))])
def test_b_operator_normalization(prefactor, expected):
    basis = build_basis(ModeSet.from_vectors(PAIR), 4, EXCITATION_TRUNCATED)
    b = ladder_ops(basis, E1, B, prefactor=prefactor)
    vacuum = basis.vacuum_index()
    one = basis.index_of((1, 0))
    assert b.matrix[vacuum, one] == pytest.approx(expected, rel=1e-14)


def test_b_operators_need_excitation_sector():
    basis = build_basis(ModeSet.from_vectors(PAIR, include_zero=True), 3, FIXED_TOTAL)
    with pytest.raises(InvalidArgumentError):
        ladder_ops(basis, E1, B)


def test_two_mode_pairing_spectrum(pair_basis):
    H = _two_mode_hamiltonian(pair_basis)
    assert H.hermiticity_defect() <= 1e-14
    expected = quad_diagonalize(2.0, 1.0)
    values = exact_spectrum(H, k=4).eigenvalues
    assert values[0] == pytest.approx(expected.ground_shift, abs=1e-10)
    assert values[1] == pytest.approx(expected.ground_shift + expected.eps, abs=1e-10)
    assert values[2] == pytest.approx(expected.ground_shift + expected.eps, abs=1e-10)
    assert values[0] == pytest.approx(math.sqrt(3.0) - 2.0, abs=1e-10)


def test_two_mode_pairing_truncation_converged(pair_basis):
    wide = build_basis(ModeSet.from_vectors(PAIR), 80, EXCITATION_TRUNCATED, mode_cap=40)
    narrow_values = exact_spectrum(_two_mode_hamiltonian(pair_basis), k=3).eigenvalues
    wide_values = exact_spectrum(_two_mode_hamiltonian(wide), k=3).eigenvalues
    np.testing.assert_allclose(narrow_values, wide_values, atol=1e-10)


def test_bogoliubov_generator_maps_vacuum_to_ground_state(pair_basis):
    H = _two_mode_hamiltonian(pair_basis)
    tau = quad_diagonalize(2.0, 1.0).tau
    spec = GeneratorSpec(kind=B_TAU, coefficients={1: tau}, ladder=A)
    G = build_generator(spec, pair_basis, 40)
    transformed = conjugate(H, G, method=EXACT_EXPM)
    vacuum = np.zeros(pair_basis.dimension)
    vacuum[pair_basis.vacuum_index()] = 1.0
    image = transformed.matrix @ vacuum
    energy = float(vacuum @ image)
    assert energy == pytest.approx(math.sqrt(3.0) - 2.0, abs=1e-9)
    assert np.linalg.norm(image - energy * vacuum) < 1e-8


@pytest.fixture(scope='module')
def small_map():
    excitations = ModeSet.from_vectors(PAIR)
    basis_N = build_basis(excitations.with_zero(), 4, FIXED_TOTAL)
    basis_plus = build_basis(excitations, 4, EXCITATION_TRUNCATED)
    return excitation_map(basis_N, basis_plus)


def test_excitation_map_substitution_rules(small_map):
    assert small_map.unitarity_defect() <= 1e-14
    for rule, defect in small_map.substitution_defects().items():
        assert defect <= 1e-12, rule


def test_excitation_map_vacuum_energy(small_map, square_well):
    H = build_hamiltonian(square_well, 4, small_map.basis_N)
    assert H.hermiticity_defect() <= 1e-12
    L = small_map.forward(H)
    vacuum = small_map.basis_plus.vacuum_index()
    assert L.matrix[vacuum, vacuum] == pytest.approx(4.0 * math.pi, abs=1e-10)


def test_excitation_map_depletion_identity(small_map):
    rng = np.random.default_rng(7)
    for _ in range(5):
        psi = rng.standard_normal(small_map.basis_N.dimension)
        psi /= np.linalg.norm(psi)
        assert small_map.excitation_count_identity(psi) <= 1e-12
        assert np.linalg.norm(small_map.inverse(small_map.apply(psi)) - psi) <= 1e-14


def test_hamiltonian_needs_fixed_total(square_well):
    basis = build_basis(ModeSet.from_vectors(PAIR), 3, EXCITATION_TRUNCATED)
    with pytest.raises(InvalidArgumentError):
        build_hamiltonian(square_well, 3, basis)


def test_hamiltonian_counts_dropped_terms(square_well):
    basis = build_basis(ModeSet.from_vectors(PAIR, include_zero=True), 2, FIXED_TOTAL)
    H = build_hamiltonian(square_well, 2, basis)
    assert H.dropped_terms > 0


def test_generators_on_extended_mode_set(square_well):
    excitations = ModeSet.from_vectors(SQUARE + (E12, -E12))
    basis = build_basis(excitations, 3, EXCITATION_TRUNCATED)
    eta = {1: -0.08, 2: -0.05}
    for kind in (B_ETA, CUBIC_A, CUBIC_ATILDE):
        G = build_generator(GeneratorSpec(kind=kind, coefficients=eta, high_min_norm=2, low_max_norm=1),
                            basis, 3)
        assert G.norm() > 0
        assert G.leaked_terms == 0
        assert G.anti_hermiticity_defect() <= 1e-12 * max(1.0, G.norm())
    cubic = build_generator(GeneratorSpec(kind=CUBIC_A, coefficients=eta, high_min_norm=2, low_max_norm=1),
                            basis, 3)
    assert cubic.dropped_terms > 0
    C = build_cubic_CN(basis, 3, square_well, eta)
    assert C.hermiticity_defect() <= 1e-12 * max(1.0, C.norm())


def test_generator_requires_coefficients_and_pairing():
    basis = build_basis(ModeSet.from_vectors(SQUARE), 3, EXCITATION_TRUNCATED)
    with pytest.raises(InvalidArgumentError):
        build_generator(GeneratorSpec(kind=B_ETA, coefficients={2: 0.1}), basis, 3)
    with pytest.raises(InvalidArgumentError):
        build_generator(GeneratorSpec(kind=B_ETA, coefficients={1: 0.1}), basis, 4)
    open_basis = build_basis(ModeSet.from_vectors((E1, E2)), 3, EXCITATION_TRUNCATED)
    with pytest.raises(InvalidArgumentError):
        build_generator(GeneratorSpec(kind=B_ETA, coefficients={1: 0.1}), open_basis, 3)
    with pytest.raises(InvalidArgumentError):
        GeneratorSpec(kind='B_sigma', coefficients={1: 0.1})


def test_truncated_bch_matches_exact_conjugation():
    basis = build_basis(ModeSet.from_vectors(PAIR), 4, EXCITATION_TRUNCATED)
    H = word_operator(basis, [(p.p_squared, [(p, A_DAG), (p, A)]) for p in PAIR], label='K')
    G = build_generator(GeneratorSpec(kind=B_TAU, coefficients={1: 0.01}), basis, 4)
    exact = conjugate(H, G, method=EXACT_EXPM)
    series = conjugate(H, G, method=TRUNCATED_BCH, order=8)
    first_order = conjugate(H, G, method=TRUNCATED_BCH, order=1)
    error = np.linalg.norm(series.dense() - exact.dense(), 2)
    assert error <= 1e-8
    assert series.info['bch_remainder'] <= 1e-8
    assert np.linalg.norm(first_order.dense() - exact.dense(), 2) > error


def test_conjugate_rejects_hermitian_generator():
    basis = build_basis(ModeSet.from_vectors(PAIR), 3, EXCITATION_TRUNCATED)
    H = word_operator(basis, [(1.0, [(E1, A_DAG), (E1, A)])], label='n')
    with pytest.raises(InvalidArgumentError):
        conjugate(H, H)


def test_localization_partition():
    basis = build_basis(ModeSet.from_vectors(SQUARE), 4, EXCITATION_TRUNCATED)
    f_M, g_M = localization_ops(LocalizationProfile(), 2.0, basis)
    assert partition_defect(f_M, g_M) <= 1e-12
    excitations = basis.excitation_numbers()
    f = f_M.matrix.diagonal()
    assert np.all(f[excitations <= 1] == 1.0)
    assert np.all(f[excitations >= 2] == 0.0)
    with pytest.raises(InvalidArgumentError):
        localization_ops(LocalizationProfile(), 0.0, basis)


def test_pipeline_extended_mode_set(square_well):
    settings = SimulationSettings(modes=SQUARE + (E12, -E12), n_particles=3, high_min_norm=2, low_max_norm=1)
    report = run_pipeline(square_well, settings, eta={1: -0.08, 2: -0.05}, tau={1: 0.07, 2: 0.04}, seed=1)
    assert [step['generator'] for step in report.steps] == [B_ETA, CUBIC_A, CUBIC_ATILDE, B_TAU]
    for step in report.steps:
        assert step['spectrum_drift'] <= 1e-8
        assert step['leaked_terms'] == 0
        assert step['generator_norm'] > 0
    checks = report.checks
    assert checks['localization_partition_defect'] <= 1e-12
    assert checks['vacuum_energy_defect'] <= 1e-10
    assert checks['unitarity_defect'] <= 1e-14
    assert checks['depletion_identity_defect'] <= 1e-12
    assert checks['cubic_CN_hermiticity_defect'] <= 1e-10
    assert report.basis['excitation_space']['dimension'] == stars_and_bars(6, 3, EXCITATION_TRUNCATED)


def test_pipeline_default_modes(square_well):
    settings = SimulationSettings(modes=SQUARE, n_particles=3, eigenvalues=5)
    report = run_pipeline(square_well, settings, eta={1: -0.1}, tau={1: 0.05})
    assert len(report.steps) == 4
    assert len(report.spectra['excitation_hamiltonian']) == 5
    assert report.checks['vacuum_energy_expected'] == pytest.approx(8.0 * math.pi / 3.0, rel=1e-12)
    assert report.checks['max_spectrum_drift'] <= 1e-8
    assert report.checks['dropped_interaction_terms'] > 0
    # ±e1, ±e2 alone hold no high shell for the cubic generators
    assert [step['terms'] > 0 for step in report.steps] == [True, False, False, True]


def test_default_fock_config_builds_every_generator(square_well):
    fock = FockConfig()
    settings = SimulationSettings(modes=tuple(LatticeVector(m) for m in fock.modes), n_particles=fock.n_particles,
                                  generators=fock.generators, high_min_norm=fock.high_min_norm,
                                  low_max_norm=fock.low_max_norm, pairing_min_norm=fock.pairing_min_norm,
                                  random_states=0, eigenvalues=3)
    report = run_pipeline(square_well, settings, eta={1: -0.08, 2: -0.05}, tau={1: 0.07, 2: 0.04})
    assert [step['generator'] for step in report.steps] == [B_ETA, CUBIC_A, CUBIC_ATILDE, B_TAU]
    for step in report.steps:
        assert step['terms'] > 0
        assert step['generator_norm'] > 0
    assert report.checks['max_spectrum_drift'] <= 1e-8


def test_empty_generator_is_reported(caplog):
    basis = build_basis(ModeSet.from_vectors(PAIR), 3, EXCITATION_TRUNCATED)
    with caplog.at_level('WARNING', logger='src.fock_sim.generators'):
        G = build_generator(GeneratorSpec(kind=CUBIC_A, coefficients={1: -0.1}), basis, 3)
    assert G.info['terms'] == 0
    assert G.norm() == 0.0
    assert 'cubic_A is empty' in caplog.text


@pytest.mark.parametrize("kind", [B_ETA, B_TAU])
def test_pairing_generators_ignore_cubic_cutoffs(kind):
    basis = build_basis(ModeSet.from_vectors(SQUARE + (E12, -E12)), 3, EXCITATION_TRUNCATED)
    settings = SimulationSettings(modes=SQUARE + (E12, -E12), n_particles=3, high_min_norm=2, low_max_norm=1)
    spec = generator_spec(kind, settings, {1: 0.07, 2: 0.04})
    assert spec.high_min_norm is None
    G = build_generator(spec, basis, 3)
    low = build_generator(GeneratorSpec(kind=kind, coefficients={1: 0.07, 2: 0.0}), basis, 3)
    high = build_generator(GeneratorSpec(kind=kind, coefficients={1: 0.0, 2: 0.04}), basis, 3)
    assert low.norm() > 0
    assert np.abs((G.matrix - low.matrix - high.matrix).toarray()).max() <= 1e-14
    restricted = build_generator(generator_spec(kind, SimulationSettings(
        modes=settings.modes, n_particles=3, pairing_min_norm=2), {1: 0.07, 2: 0.04}), basis, 3)
    assert np.abs((restricted.matrix - high.matrix).toarray()).max() <= 1e-14


def test_pipeline_with_bch_reports_remainder(square_well):
    settings = SimulationSettings(modes=PAIR, n_particles=2, generators=(B_ETA,), conjugation=TRUNCATED_BCH)
    report = run_pipeline(square_well, settings, eta={1: -0.01}, tau={1: 0.01})
    assert 'bch_remainder' in report.steps[0]
    assert report.steps[0]['spectrum_drift'] <= 1e-6


def test_pipeline_rejects_unpaired_modes(square_well):
    with pytest.raises(InvalidArgumentError):
        run_pipeline(square_well, SimulationSettings(modes=(E1, E2), n_particles=2), {1: 0.0}, {1: 0.0})


def test_operator_dump(tmp_path):
    basis = build_basis(ModeSet.from_vectors(PAIR), 3, EXCITATION_TRUNCATED)
    G = build_generator(GeneratorSpec(kind=B_ETA, coefficients={1: -0.2}), basis, 3)
    path = tmp_path / 'ops' / 'B_eta.txt'
    write_operator(G, str(path))
    header, triplets = read_operator(str(path))
    assert header['label'] == B_ETA
    assert header['nnz'] == len(triplets) == G.matrix.nnz
    assert header['basis']['dimension'] == basis.dimension
    assert triplets == G.to_triplets()
