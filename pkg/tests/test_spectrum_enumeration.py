import math

import pytest

from src.bogoliubov_formulas import DispersionModel
from src.errors import InvalidArgumentError, ResourceError
from src.momentum_lattice import TWO_PI_SQ, enumerate_shells, vectors_up_to
from src.spectrum_enumeration import (SpectrumRequest, brute_force_spectrum, composition_label,
                                      enumerate_spectrum, iter_spectrum, lines_as_multiset,
                                      search_space_size, spectrum_staircase)


def _cutoff(model, zeta):
    n = 1
    while not model.energy(n) > zeta:
        n += 1
    return n


def _both(model, zeta, include_boundary=True):
    n_max = _cutoff(model, zeta)
    request = SpectrumRequest(model=model, zeta=zeta, shells=enumerate_shells(n_max),
                              include_boundary=include_boundary)
    modes = [v for vs in vectors_up_to(n_max).values() for v in vs]
    return (enumerate_spectrum(request),
            brute_force_spectrum(model, modes, zeta, include_boundary=include_boundary))


@pytest.mark.parametrize("model, quanta", [
    (DispersionModel.free(), 3.0),
    (DispersionModel.free(), 5.0),
    (DispersionModel.free(), 4.5),
    (DispersionModel.gross_pitaevskii(0.05), 3.5),
    (DispersionModel.gross_pitaevskii(0.2), 4.0),
])
def test_enumeration_matches_brute_force(model, quanta):
    zeta = quanta * model.energy(1)
    lines, oracle = _both(model, zeta)
    assert lines_as_multiset(lines) == lines_as_multiset(oracle)
    assert sum(line.multiplicity for line in lines) == sum(line.multiplicity for line in oracle)
    assert len(lines) >= 4


def test_free_model_collision_at_two_quanta():
    # one quantum of shell 2 and two of shell 1 share the energy 2(2π)²
    lines, _ = _both(DispersionModel.free(), 5 * TWO_PI_SQ)
    by_energy = {round(line.energy / TWO_PI_SQ): line for line in lines}
    assert by_energy[2].multiplicity == math.comb(7, 2) + 12 == 33
    assert by_energy[1].multiplicity == 6
    assert by_energy[0].multiplicity == 1


def test_gross_pitaevskii_separates_colliding_lines():
    model = DispersionModel.gross_pitaevskii(0.2)
    lines, _ = _both(model, 2.5 * model.energy(1))
    two_single = [l for l in lines if composition_label(l.witness) == '1^2']
    one_double = [l for l in lines if composition_label(l.witness) == '2^1']
    assert two_single[0].multiplicity == 21
    assert one_double[0].multiplicity == 12
    assert two_single[0].energy != one_double[0].energy


def test_threshold_below_first_shell_gives_vacuum_only():
    model = DispersionModel.free()
    request = SpectrumRequest(model=model, zeta=0.5 * TWO_PI_SQ, shells=enumerate_shells(1))
    lines = enumerate_spectrum(request)
    assert len(lines) == 1
    assert lines[0].energy == 0.0 and lines[0].multiplicity == 1
    assert lines[0].to_row() == (0.0, 1, 'vacuum')


def test_boundary_inclusion():
    model = DispersionModel.free()
    zeta = 2 * TWO_PI_SQ
    inclusive, _ = _both(model, zeta, include_boundary=True)
    exclusive, _ = _both(model, zeta, include_boundary=False)
    assert [round(l.energy / TWO_PI_SQ) for l in inclusive] == [0, 1, 2]
    assert [round(l.energy / TWO_PI_SQ) for l in exclusive] == [0, 1]


def test_enumeration_thread_independent():
    model = DispersionModel.gross_pitaevskii(0.1)
    zeta = 4.0 * model.energy(1)
    request = SpectrumRequest(model=model, zeta=zeta, shells=enumerate_shells(_cutoff(model, zeta)))
    assert enumerate_spectrum(request, threads=1) == enumerate_spectrum(request, threads=4)


def test_shallow_table_rejected():
    model = DispersionModel.free()
    with pytest.raises(InvalidArgumentError):
        enumerate_spectrum(SpectrumRequest(model=model, zeta=3 * TWO_PI_SQ, shells=enumerate_shells(2)))
    with pytest.raises(InvalidArgumentError):
        enumerate_spectrum(SpectrumRequest(model=model, zeta=-1.0, shells=enumerate_shells(2)))


def test_brute_force_resource_cap():
    modes = [v for vs in vectors_up_to(3).values() for v in vs]
    assert search_space_size(len(modes), 10) > 1000
    with pytest.raises(ResourceError):
        brute_force_spectrum(DispersionModel.free(), modes, 10 * TWO_PI_SQ, max_states=1000)


def test_staircase_counts_states():
    lines, _ = _both(DispersionModel.free(), 3 * TWO_PI_SQ)
    staircase = spectrum_staircase(lines)
    assert [count for _, count in staircase][:3] == [1, 7, 40]
    assert staircase[-1][1] == sum(line.multiplicity for line in lines)


@pytest.mark.parametrize("model, quanta, include_boundary", [
    (DispersionModel.free(), 5.0, True),
    (DispersionModel.free(), 5.0, False),
    (DispersionModel.gross_pitaevskii(0.2), 6.0, True),
])
@pytest.mark.parametrize("bands", [1, 3, 8])
def test_streamed_lines_match_enumeration(model, quanta, include_boundary, bands):
    zeta = quanta * model.energy(1)
    request = SpectrumRequest(model=model, zeta=zeta, shells=enumerate_shells(_cutoff(model, zeta)),
                              include_boundary=include_boundary)
    assert list(iter_spectrum(request, bands=bands)) == enumerate_spectrum(request)


def test_streamed_vacuum_only():
    model = DispersionModel.free()
    request = SpectrumRequest(model=model, zeta=10.0, shells=enumerate_shells(1))
    lines = list(iter_spectrum(request))
    assert [line.to_row() for line in lines] == [(0.0, 1, 'vacuum')]
    with pytest.raises(InvalidArgumentError):
        list(iter_spectrum(request, bands=0))
