"""Excitation spectrum Σ n_p E(p) below a threshold, with exact multiplicities.

Lines are grouped combinatorially. Under the free model every energy is
(2π)² times an integer, so lines merge by that integer; under any other model
they merge only when their shell compositions (m_s quanta in shell s) agree.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterator, List, Sequence, Tuple

from src.bogoliubov_formulas import DispersionModel
from src.errors import InvalidArgumentError, ResourceError
from src.momentum_lattice import (TWO_PI_SQ, CompensatedSum, LatticeVector, Shell, ShellTable,
                                  evaluate_in_order)

logger = logging.getLogger(__name__)

MAX_BRUTE_FORCE_STATES = 10 ** 8
# Relative closeness of distinct lines that triggers a proximity warning.
PROXIMITY_TOLERANCE = 1e-9

Composition = Tuple[Tuple[int, int], ...]


@dataclass(frozen=True)
class SpectrumLine:
    energy: float
    multiplicity: int
    witness: Composition
    key: tuple

    def to_row(self) -> Tuple[float, int, str]:
        return self.energy, self.multiplicity, composition_label(self.witness)


@dataclass(frozen=True)
class SpectrumRequest:
    model: DispersionModel
    zeta: float
    shells: ShellTable
    include_boundary: bool = True

    def validate(self):
        if not math.isfinite(self.zeta) or self.zeta <= 0:
            raise InvalidArgumentError(f"zeta must be finite and > 0, got {self.zeta}")
        top = self.model.energy(self.shells.n_max)
        if not top > self.zeta:
            raise InvalidArgumentError(
                f"shell table too shallow: E(n_max={self.shells.n_max}) = {top:.6g} <= zeta = {self.zeta}")


def composition_label(composition: Composition) -> str:
    if not composition:
        return 'vacuum'
    return ' '.join(f"{norm}^{m}" for norm, m in composition)


def composition_energy(model: DispersionModel, composition: Composition) -> float:
    """Σ m_s·E_s accumulated in ascending shell order."""
    if model.integer_keyed:
        return TWO_PI_SQ * sum(norm * m for norm, m in composition)
    acc = CompensatedSum()
    for norm, m in composition:
        acc.add(m * model.energy(norm))
    return acc.value


def line_key(model: DispersionModel, composition: Composition) -> tuple:
    if model.integer_keyed:
        return ('quanta', sum(norm * m for norm, m in composition))
    return ('composition',) + composition


def _boundary_test(zeta: float, include_boundary: bool):
    slack = 1e-12 * max(1.0, zeta)
    if include_boundary:
        return lambda energy: energy <= zeta + slack
    return lambda energy: energy < zeta - slack


def _compositions(levels: Sequence[Tuple[Shell, float]], start: int, energy: float,
                  prefix: List[Tuple[int, int]], multiplicity: int, admit) -> Iterator[Tuple[Composition, int]]:
    """Depth-first over shells from index start; levels are sorted by single-quantum energy."""
    if start == len(levels) or not admit(energy + levels[start][1]):
        yield tuple(sorted(prefix)), multiplicity
        return
    shell, quantum = levels[start]
    m = 0
    while admit(energy + m * quantum):
        if m:
            prefix.append((shell.norm_sq_int, m))
        count = math.comb(m + shell.degeneracy - 1, shell.degeneracy - 1)
        yield from _compositions(levels, start + 1, energy + m * quantum, prefix, multiplicity * count, admit)
        if m:
            prefix.pop()
        m += 1


def _group_lines(model: DispersionModel, found: Sequence[Tuple[Composition, int]],
                 admit) -> List[SpectrumLine]:
    grouped: Dict[tuple, List] = {}
    for composition, multiplicity in found:
        energy = composition_energy(model, composition)
        if not admit(energy):
            continue
        key = line_key(model, composition)
        if key in grouped:
            grouped[key][1] += multiplicity
        else:
            grouped[key] = [energy, multiplicity, composition]
    lines = [SpectrumLine(energy=e, multiplicity=m, witness=w, key=k) for k, (e, m, w) in grouped.items()]
    lines.sort(key=lambda line: (line.energy, line.key))
    for lower, upper in zip(lines, lines[1:]):
        if upper.energy - lower.energy <= PROXIMITY_TOLERANCE * max(1.0, upper.energy):
            logger.warning(f"Distinct spectrum lines {composition_label(lower.witness)} and "
                           f"{composition_label(upper.witness)} nearly coincide at E={upper.energy:.12g}")
    return lines


def single_quantum_levels(model: DispersionModel, shells: ShellTable) -> List[Tuple[Shell, float]]:
    levels = [(shell, model.energy(shell.norm_sq_int)) for shell in shells.occupied()]
    levels.sort(key=lambda item: (item[1], item[0].norm_sq_int))
    return levels


def enumerate_spectrum(request: SpectrumRequest, threads: int = 1) -> List[SpectrumLine]:
    """
    All eigenvalues Σ m_s·E_s ≤ ζ (or < ζ) with multiplicity Π C(m_s+d_s−1, d_s−1).

    Args:
        request: Model, threshold and shell table
        threads: Worker threads; work is split on the occupation of the lowest level

    Returns:
        SpectrumLine list sorted by energy
    """
    request.validate()
    admit = _boundary_test(request.zeta, request.include_boundary)
    levels = [lv for lv in single_quantum_levels(request.model, request.shells) if admit(lv[1])]
    if not levels:
        found = [((), 1)]
    else:
        shell, quantum = levels[0]
        first_counts = []
        m = 0
        while admit(m * quantum):
            first_counts.append(m)
            m += 1

        def branch(m: int) -> List[Tuple[Composition, int]]:
            prefix = [(shell.norm_sq_int, m)] if m else []
            count = math.comb(m + shell.degeneracy - 1, shell.degeneracy - 1)
            return list(_compositions(levels, 1, m * quantum, prefix, count, admit))

        found = [item for part in evaluate_in_order(branch, first_counts, threads) for item in part]
    lines = _group_lines(request.model, found, admit)
    logger.info(f"Enumerated {len(lines)} spectrum lines below zeta={request.zeta} "
                f"({sum(line.multiplicity for line in lines)} states)")
    return lines


def search_space_size(n_modes: int, max_quanta: int) -> int:
    """Occupation vectors of n_modes modes with at most max_quanta quanta in total."""
    return math.comb(max_quanta + n_modes, n_modes)


def brute_force_spectrum(model: DispersionModel, modes: Sequence[LatticeVector], zeta: float,
                         include_boundary: bool = True,
                         max_states: int = MAX_BRUTE_FORCE_STATES) -> List[SpectrumLine]:
    """Enumerate occupation vectors over explicit modes and group them like enumerate_spectrum."""
    if not math.isfinite(zeta) or zeta <= 0:
        raise InvalidArgumentError(f"zeta must be finite and > 0, got {zeta}")
    if len(set(modes)) != len(modes) or any(v.is_zero for v in modes):
        raise InvalidArgumentError("brute-force modes must be distinct and nonzero")
    admit = _boundary_test(zeta, include_boundary)
    energies = sorted(((model.energy(v.norm_sq_int), v.norm_sq_int) for v in modes))
    if energies:
        max_quanta = int(math.floor(zeta / energies[0][0]))
        size = search_space_size(len(energies), max_quanta)
        if size > max_states:
            raise ResourceError(f"brute-force search space ~{size:.3e} exceeds {max_states:.0e} states")

    found: List[Tuple[Composition, int]] = []

    def visit(index: int, energy: float, occupations: Dict[int, int]):
        if index == len(energies) or not admit(energy + energies[index][0]):
            found.append((tuple(sorted((k, m) for k, m in occupations.items() if m)), 1))
            return
        quantum, norm = energies[index]
        n = 0
        while admit(energy + n * quantum):
            occupations[norm] = occupations.get(norm, 0) + n
            visit(index + 1, energy + n * quantum, occupations)
            occupations[norm] -= n
            n += 1

    visit(0, 0.0, {})
    return _group_lines(model, found, admit)


def iter_spectrum(request: SpectrumRequest, bands: int = 8) -> Iterator[SpectrumLine]:
    """
    The lines of enumerate_spectrum in the same order, emitted one energy band at a time.

    Band edges are ζ/2^(bands−1), ..., ζ/2, ζ. Each band reruns the depth-first
    search up to its own edge and keeps only lines above the previous edge, so
    memory holds one band of lines.
    """
    request.validate()
    if bands < 1:
        raise InvalidArgumentError(f"bands must be >= 1, got {bands}")
    admit = _boundary_test(request.zeta, request.include_boundary)
    levels = [lv for lv in single_quantum_levels(request.model, request.shells) if admit(lv[1])]
    edges = [request.zeta / 2 ** j for j in range(bands - 1, 0, -1)]
    lower = None
    emitted = 0
    for edge in edges + [None]:
        if edge is None:
            search, below = admit, admit
        else:
            search, below = _boundary_test(edge, True), (lambda e, hi=edge: e <= hi)
        keep = below if lower is None else (lambda e, lo=lower, below=below: e > lo and below(e))
        found = _compositions(levels, 0, 0.0, [], 1, search) if levels else iter([((), 1)])
        for line in _group_lines(request.model, found, keep):
            emitted += 1
            yield line
        lower = edge
    logger.info(f"Streamed {emitted} spectrum lines below zeta={request.zeta}")


def lines_as_multiset(lines: Sequence[SpectrumLine]) -> Dict[tuple, int]:
    return {line.key: line.multiplicity for line in lines}


def spectrum_staircase(lines: Sequence[SpectrumLine]) -> List[Tuple[float, int]]:
    """Cumulative state count at every line energy, for plotting."""
    rows = []
    total = 0
    for line in lines:
        total += line.multiplicity
        rows.append((line.energy, total))
    return rows
