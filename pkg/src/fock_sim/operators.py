"""Sparse operator matrices built from words of ladder operators.

A word is a sequence of (mode, flavor) letters read like a formula, so the
rightmost letter acts first. Flavors are a, a_dag and the modified b, b_dag:

    b_p  = c_N·(N − N₊)^{1/2}·a_p
    b†_p = c_N·a†_p·(N − N₊)^{1/2}

with c_N = N^{-1/2} ('sqrt') or N^{-1} ('strict').
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse import linalg as sparse_linalg

from src.errors import InvalidArgumentError
from src.fock_sim.basis import EXCITATION_TRUNCATED, FIXED_TOTAL, FockBasis
from src.momentum_lattice import LatticeVector
from src.scattering import Potential, fourier_transform_radial

logger = logging.getLogger(__name__)

A = 'a'
A_DAG = 'a_dag'
B = 'b'
B_DAG = 'b_dag'
FLAVORS = (A, A_DAG, B, B_DAG)

PREFACTOR_SQRT = 'sqrt'
PREFACTOR_STRICT = 'strict'
PREFACTORS = (PREFACTOR_SQRT, PREFACTOR_STRICT)

Letter = Tuple[LatticeVector, str]
Word = Sequence[Letter]

# Dense operator-norm evaluation up to this dimension, Frobenius bound beyond.
_DENSE_NORM_LIMIT = 2000


def operator_norm(matrix) -> float:
    if sp.issparse(matrix):
        if matrix.nnz == 0:
            return 0.0
        if matrix.shape[0] > _DENSE_NORM_LIMIT:
            return float(sparse_linalg.norm(matrix))
        matrix = matrix.toarray()
    if matrix.size == 0:
        return 0.0
    return float(np.linalg.norm(matrix, 2))


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    basis: FockBasis
    matrix: sp.csr_matrix
    label: str = ''
    dropped_terms: int = 0
    leaked_terms: int = 0
    info: Dict[str, float] = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def adjoint(self) -> 'OperatorMatrix':
        return self._derived(self.matrix.conj().T.tocsr(), f"({self.label})†")

    def hermiticity_defect(self) -> float:
        return operator_norm(self.matrix - self.matrix.conj().T)

    def anti_hermiticity_defect(self) -> float:
        return operator_norm(self.matrix + self.matrix.conj().T)

    def is_hermitian(self, tolerance: float = 1e-12) -> bool:
        return self.hermiticity_defect() <= tolerance * max(1.0, operator_norm(self.matrix))

    def norm(self) -> float:
        return operator_norm(self.matrix)

    def _derived(self, matrix, label: str) -> 'OperatorMatrix':
        return OperatorMatrix(basis=self.basis, matrix=sp.csr_matrix(matrix), label=label,
                              dropped_terms=self.dropped_terms, leaked_terms=self.leaked_terms)

    def _check_basis(self, other: 'OperatorMatrix'):
        if other.basis is not self.basis:
            raise InvalidArgumentError(f"operators {self.label!r} and {other.label!r} act on different bases")

    def __add__(self, other: 'OperatorMatrix') -> 'OperatorMatrix':
        self._check_basis(other)
        return self._derived(self.matrix + other.matrix, f"{self.label} + {other.label}")

    def __sub__(self, other: 'OperatorMatrix') -> 'OperatorMatrix':
        self._check_basis(other)
        return self._derived(self.matrix - other.matrix, f"{self.label} - {other.label}")

    def __matmul__(self, other: 'OperatorMatrix') -> 'OperatorMatrix':
        self._check_basis(other)
        return self._derived(self.matrix @ other.matrix, f"{self.label}·{other.label}")

    def scaled(self, factor: float) -> 'OperatorMatrix':
        return self._derived(factor * self.matrix, f"{factor:g}·{self.label}")

    def commutator(self, other: 'OperatorMatrix') -> 'OperatorMatrix':
        self._check_basis(other)
        return self._derived(self.matrix @ other.matrix - other.matrix @ self.matrix,
                             f"[{self.label}, {other.label}]")

    def expectation(self, vector: np.ndarray) -> float:
        return float(np.real(np.vdot(vector, self.matrix @ vector)))

    def to_triplets(self) -> List[Tuple[int, int, float]]:
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return [(int(coo.row[i]), int(coo.col[i]), float(coo.data[i])) for i in order]

    def header(self) -> Dict:
        return {'label': self.label, 'basis': self.basis.describe(), 'nnz': int(self.matrix.nnz),
                'hermiticity_defect': self.hermiticity_defect(), 'dropped_terms': self.dropped_terms,
                'leaked_terms': self.leaked_terms, 'info': dict(self.info)}


def b_prefactor(N: int, mode: str = PREFACTOR_SQRT) -> float:
    if mode not in PREFACTORS:
        raise InvalidArgumentError(f"unknown b prefactor {mode!r}, expected one of {PREFACTORS}")
    return 1.0 / math.sqrt(N) if mode == PREFACTOR_SQRT else 1.0 / N


class _WordAction:
    """Applies words to occupation vectors of one basis, projecting onto the truncated space."""

    def __init__(self, basis: FockBasis, prefactor: str):
        self.basis = basis
        self.N = basis.N
        self.prefactor = b_prefactor(basis.N, prefactor)
        self.zero = basis.zero_position
        self.cap = basis.mode_cap
        self.project_intermediate = basis.sector == EXCITATION_TRUNCATED
        self.leaked = 0

    def _outside(self, occupations: List[int], n_plus: int, position: int) -> bool:
        if self.cap is not None and occupations[position] > self.cap:
            return True
        return self.project_intermediate and n_plus > self.N

    def apply(self, state: Tuple[int, ...], letters: Sequence[Tuple[int, str]]) -> Tuple[Optional[int], float]:
        occupations = list(state)
        n_plus = sum(occupations) - (occupations[self.zero] if self.zero is not None else 0)
        amplitude = 1.0
        for position, flavor in reversed(letters):
            excited = position != self.zero
            if flavor in (A, B):
                n = occupations[position]
                if n == 0:
                    return None, 0.0
                amplitude *= math.sqrt(n)
                occupations[position] -= 1
                if excited:
                    n_plus -= 1
                if flavor == B:
                    amplitude *= self.prefactor * math.sqrt(self.N - n_plus)
            else:
                if flavor == B_DAG:
                    amplitude *= self.prefactor * math.sqrt(max(self.N - n_plus, 0))
                    if amplitude == 0.0:
                        return None, 0.0
                occupations[position] += 1
                amplitude *= math.sqrt(occupations[position])
                if excited:
                    n_plus += 1
                if self._outside(occupations, n_plus, position):
                    self.leaked += 1
                    return None, 0.0
        row = self.basis.index_of(occupations)
        if row is None:
            self.leaked += 1
            return None, 0.0
        return row, amplitude


def _resolve(basis: FockBasis, word: Word) -> List[Tuple[int, str]]:
    letters = []
    for mode, flavor in word:
        if flavor not in FLAVORS:
            raise InvalidArgumentError(f"unknown ladder flavor {flavor!r}")
        if flavor in (B, B_DAG) and basis.sector != EXCITATION_TRUNCATED:
            raise InvalidArgumentError("b operators act on the excitation_truncated sector only")
        letters.append((basis.modes.index(mode), flavor))
    return letters


def word_operator(basis: FockBasis, terms: Sequence[Tuple[float, Word]], label: str = '',
                  prefactor: str = PREFACTOR_SQRT, dropped_terms: int = 0) -> OperatorMatrix:
    """
    Σ coefficient·word as a sparse matrix on the basis.

    Args:
        basis: Target basis
        terms: (coefficient, word) pairs
        label: Name carried into reports
        prefactor: b-operator normalization, 'sqrt' or 'strict'
        dropped_terms: Count of terms the caller discarded, recorded on the result

    Returns:
        OperatorMatrix with the number of out-of-space amplitudes in leaked_terms
    """
    action = _WordAction(basis, prefactor)
    resolved = [(float(c), _resolve(basis, word)) for c, word in terms if c != 0.0]
    rows: List[int] = []
    cols: List[int] = []
    data: List[float] = []
    for col, state in enumerate(basis.states):
        for coefficient, letters in resolved:
            row, amplitude = action.apply(state, letters)
            if row is not None and amplitude != 0.0:
                rows.append(row)
                cols.append(col)
                data.append(coefficient * amplitude)
    dim = basis.dimension
    matrix = sp.csr_matrix((data, (rows, cols)), shape=(dim, dim))
    matrix.sum_duplicates()
    return OperatorMatrix(basis=basis, matrix=matrix, label=label, dropped_terms=dropped_terms,
                          leaked_terms=action.leaked)


def ladder_ops(basis: FockBasis, mode: LatticeVector, flavor: str,
               prefactor: str = PREFACTOR_SQRT) -> OperatorMatrix:
    """Single ladder operator a, a†, b or b† of one mode."""
    return word_operator(basis, [(1.0, [(mode, flavor)])], label=f"{flavor}{mode}", prefactor=prefactor)


def diagonal_operator(basis: FockBasis, values: np.ndarray, label: str = '') -> OperatorMatrix:
    values = np.asarray(values, dtype=float)
    if values.shape != (basis.dimension,):
        raise InvalidArgumentError(f"diagonal has shape {values.shape}, basis dimension {basis.dimension}")
    return OperatorMatrix(basis=basis, matrix=sp.diags(values, format='csr'), label=label)


def identity(basis: FockBasis) -> OperatorMatrix:
    return diagonal_operator(basis, np.ones(basis.dimension), label='1')


def excitation_number(basis: FockBasis) -> OperatorMatrix:
    return diagonal_operator(basis, basis.excitation_numbers().astype(float), label='N+')


def number_operator(basis: FockBasis, mode: LatticeVector) -> OperatorMatrix:
    position = basis.modes.index(mode)
    return diagonal_operator(basis, np.array([s[position] for s in basis.states], dtype=float),
                             label=f"n{mode}")


def build_hamiltonian(potential: Potential, N: int, basis: FockBasis) -> OperatorMatrix:
    """
    Σ p²a†ₚaₚ + (2N)⁻¹ Σ_{p,q,r} V̂(|r|/N) a†_{p+r}a†_q a_p a_{q+r} on a fixed_total basis.

    Interaction terms with a momentum outside the mode set are dropped and counted.
    """
    if basis.sector != FIXED_TOTAL:
        raise InvalidArgumentError("the Hamiltonian is built on a fixed_total basis")
    if N != basis.N:
        raise InvalidArgumentError(f"N={N} does not match basis N={basis.N}")
    modes = basis.modes
    kinetic = np.zeros(basis.dimension)
    for position, vector in enumerate(modes):
        if not vector.is_zero:
            kinetic += vector.p_squared * np.array([s[position] for s in basis.states], dtype=float)

    transfers = sorted({p - q for p in modes for q in modes})
    terms = []
    dropped = 0
    for p in modes:
        for q in modes:
            for r in transfers:
                if p + r not in modes or q + r not in modes:
                    dropped += 1
                    continue
                coefficient = fourier_transform_radial(potential, r.p_abs / N) / (2.0 * N)
                terms.append((coefficient, [(p + r, A_DAG), (q, A_DAG), (p, A), (q + r, A)]))
    interaction = word_operator(basis, terms, label='V', dropped_terms=dropped)
    if dropped:
        logger.warning(f"Dropped {dropped} interaction terms leaving the mode set")
    hamiltonian = OperatorMatrix(basis=basis, matrix=(sp.diags(kinetic, format='csr') + interaction.matrix).tocsr(),
                                 label='H', dropped_terms=dropped, leaked_terms=interaction.leaked_terms)
    logger.info(f"Built Hamiltonian on {basis.dimension} states, {len(terms)} interaction terms")
    return hamiltonian
