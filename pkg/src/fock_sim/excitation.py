"""The excitation map U_N between the N-particle space and the truncated excitation space."""
import logging
from dataclasses import dataclass
from typing import Dict

import numpy as np
import scipy.sparse as sp

from src.errors import InvalidArgumentError
from src.fock_sim.basis import EXCITATION_TRUNCATED, FIXED_TOTAL, FockBasis
from src.fock_sim.operators import (A, A_DAG, OperatorMatrix, diagonal_operator, excitation_number,
                                    operator_norm, word_operator)
from src.momentum_lattice import ZERO

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ExcitationMap:
    """U_N: (n₀, n_{p₁}, …) ↦ (n_{p₁}, …), a permutation matrix from basis_N onto basis_plus."""

    basis_N: FockBasis
    basis_plus: FockBasis
    matrix: sp.csr_matrix

    def forward(self, operator: OperatorMatrix) -> OperatorMatrix:
        """U·X·U* on the excitation space."""
        if operator.basis is not self.basis_N:
            raise InvalidArgumentError("operator does not act on the N-particle basis of this map")
        mapped = (self.matrix @ operator.matrix @ self.matrix.T).tocsr()
        return OperatorMatrix(basis=self.basis_plus, matrix=mapped, label=f"U {operator.label} U*",
                              dropped_terms=operator.dropped_terms, leaked_terms=operator.leaked_terms)

    def apply(self, psi: np.ndarray) -> np.ndarray:
        return self.matrix @ psi

    def inverse(self, xi: np.ndarray) -> np.ndarray:
        return self.matrix.T @ xi

    def depletion(self, psi: np.ndarray) -> float:
        """N − ⟨ψ, a₀†a₀ψ⟩ for a normalized N-particle vector ψ."""
        condensate = np.array([s[0] for s in self.basis_N.states], dtype=float)
        return float(self.basis_N.N - np.vdot(psi, condensate * psi).real)

    def unitarity_defect(self) -> float:
        identity_plus = sp.identity(self.basis_plus.dimension, format='csr')
        identity_N = sp.identity(self.basis_N.dimension, format='csr')
        return max(operator_norm(self.matrix @ self.matrix.T - identity_plus),
                   operator_norm(self.matrix.T @ self.matrix - identity_N))

    def substitution_defects(self) -> Dict[str, float]:
        """
        Largest deviation of each substitution rule over all modes:

            U a₀†a₀ U* = N − N₊
            U aₚ†a₀ U* = aₚ†·√(N − N₊)
            U a₀†aₚ U* = √(N − N₊)·aₚ
            U aₚ†a_q U* = aₚ†a_q
        """
        plus = self.basis_plus
        sqrt_free = diagonal_operator(plus, np.sqrt(plus.N - plus.excitation_numbers().astype(float)))
        remaining = diagonal_operator(plus, plus.N - plus.excitation_numbers().astype(float))
        defects = {'condensate_number': 0.0, 'creation': 0.0, 'annihilation': 0.0, 'excitation_pair': 0.0}

        def mismatch(word, expected: OperatorMatrix) -> float:
            mapped = self.forward(word_operator(self.basis_N, [(1.0, word)]))
            return operator_norm(mapped.matrix - expected.matrix)

        defects['condensate_number'] = mismatch([(ZERO, A_DAG), (ZERO, A)], remaining)
        modes = plus.modes.modes
        for p in modes:
            create = word_operator(plus, [(1.0, [(p, A_DAG)])])
            annihilate = word_operator(plus, [(1.0, [(p, A)])])
            defects['creation'] = max(defects['creation'],
                                      mismatch([(p, A_DAG), (ZERO, A)], create @ sqrt_free))
            defects['annihilation'] = max(defects['annihilation'],
                                          mismatch([(ZERO, A_DAG), (p, A)], sqrt_free @ annihilate))
            for q in modes:
                pair = word_operator(plus, [(1.0, [(p, A_DAG), (q, A)])])
                defects['excitation_pair'] = max(defects['excitation_pair'],
                                                 mismatch([(p, A_DAG), (q, A)], pair))
        return defects

    def excitation_count_identity(self, psi: np.ndarray) -> float:
        """|depletion(ψ) − ⟨Uψ, N₊ Uψ⟩|."""
        xi = self.apply(psi)
        return abs(self.depletion(psi) - excitation_number(self.basis_plus).expectation(xi))


def excitation_map(basis_N: FockBasis, basis_plus: FockBasis) -> ExcitationMap:
    """
    Build U_N between a fixed_total basis and an excitation_truncated basis.

    Args:
        basis_N: fixed_total basis whose first mode is the zero mode
        basis_plus: excitation_truncated basis over the same nonzero modes and N

    Returns:
        ExcitationMap holding the permutation matrix
    """
    if basis_N.sector != FIXED_TOTAL or basis_plus.sector != EXCITATION_TRUNCATED:
        raise InvalidArgumentError("excitation map goes from fixed_total to excitation_truncated")
    if basis_N.N != basis_plus.N:
        raise InvalidArgumentError(f"particle numbers differ: {basis_N.N} vs {basis_plus.N}")
    if basis_N.modes.nonzero != basis_plus.modes.modes:
        raise InvalidArgumentError("bases do not share the same nonzero modes in the same order")
    if basis_N.dimension != basis_plus.dimension:
        raise InvalidArgumentError(f"basis dimensions differ: {basis_N.dimension} vs {basis_plus.dimension}")
    rows = []
    for state in basis_N.states:
        row = basis_plus.index_of(state[1:])
        if row is None:
            raise InvalidArgumentError(f"state {state} has no image in the excitation basis")
        rows.append(row)
    dim = basis_N.dimension
    matrix = sp.csr_matrix((np.ones(dim), (rows, np.arange(dim))), shape=(dim, dim))
    logger.debug(f"Built excitation map on {dim} states")
    return ExcitationMap(basis_N=basis_N, basis_plus=basis_plus, matrix=matrix)
