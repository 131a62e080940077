"""Unitary conjugation, localization in N₊ and exact diagonalization."""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from src.errors import InvalidArgumentError, NumericError, ResourceError
from src.fock_sim.operators import OperatorMatrix, diagonal_operator, operator_norm

logger = logging.getLogger(__name__)

EXACT_EXPM = 'exact_expm'
TRUNCATED_BCH = 'truncated_BCH'
CONJUGATION_METHODS = (EXACT_EXPM, TRUNCATED_BCH)
DEFAULT_DENSE_CAP = 4096
DEFAULT_BCH_ORDER = 8


class LocalizationProfile:
    """
    Smooth partition f² + g² = 1 with f = 1 on [0, ½] and f = 0 on [1, ∞).

    f(x) = cos(π/2·s(x)), g(x) = sin(π/2·s(x)) where s is a C^∞ step
    rising from 0 at x = ½ to 1 at x = 1.
    """

    @staticmethod
    def _step(x: np.ndarray) -> np.ndarray:
        t = np.clip((np.asarray(x, dtype=float) - 0.5) / 0.5, 0.0, 1.0)
        with np.errstate(divide='ignore', over='ignore'):
            rise = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
            fall = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
        return rise / (rise + fall)

    def f(self, x) -> np.ndarray:
        s = self._step(x)
        return np.where(s >= 1.0, 0.0, np.cos(0.5 * math.pi * s))

    def g(self, x) -> np.ndarray:
        s = self._step(x)
        return np.where(s >= 1.0, 1.0, np.sin(0.5 * math.pi * s))


def localization_ops(profile: LocalizationProfile, M: float, basis) -> Tuple[OperatorMatrix, OperatorMatrix]:
    """f_M = f(N₊/M) and g_M = g(N₊/M) as diagonal matrices."""
    if not M > 0:
        raise InvalidArgumentError(f"localization scale M must be > 0, got {M}")
    x = basis.excitation_numbers().astype(float) / M
    return (diagonal_operator(basis, profile.f(x), label=f"f_{M:g}"),
            diagonal_operator(basis, profile.g(x), label=f"g_{M:g}"))


def partition_defect(f_M: OperatorMatrix, g_M: OperatorMatrix) -> float:
    """‖f_M² + g_M² − 1‖."""
    square = (f_M.matrix @ f_M.matrix + g_M.matrix @ g_M.matrix).diagonal()
    return float(np.max(np.abs(square - 1.0))) if square.size else 0.0


def localization_split(H: OperatorMatrix, f_M: OperatorMatrix, g_M: OperatorMatrix) -> Tuple[OperatorMatrix, float]:
    """f_M H f_M + g_M H g_M and its distance from H (the localization remainder)."""
    split = (f_M @ H @ f_M) + (g_M @ H @ g_M)
    remainder = operator_norm(split.matrix - H.matrix)
    split.info['localization_remainder'] = remainder
    return split, remainder


def conjugate(H: OperatorMatrix, G: OperatorMatrix, method: str = EXACT_EXPM,
              order: int = DEFAULT_BCH_ORDER, dense_cap: int = DEFAULT_DENSE_CAP) -> OperatorMatrix:
    """
    e^{−G} H e^{G} for an anti-hermitian G.

    Args:
        H: Operator to transform
        G: Anti-hermitian generator on the same basis
        method: exact_expm (dense scaling-and-squaring) or truncated_BCH
        order: Number of nested commutators kept by truncated_BCH
        dense_cap: Largest dimension handled densely by exact_expm

    Returns:
        OperatorMatrix; truncated_BCH stores the next-term norm as info['bch_remainder']
    """
    if G.basis is not H.basis:
        raise InvalidArgumentError("H and G act on different bases")
    if method not in CONJUGATION_METHODS:
        raise InvalidArgumentError(f"unknown conjugation method {method!r}")
    defect = G.anti_hermiticity_defect()
    if defect > 1e-10 * max(1.0, G.norm()):
        raise InvalidArgumentError(f"generator {G.label!r} is not anti-hermitian (defect {defect:.3e})")
    label = f"e^-{G.label} {H.label} e^{G.label}"

    if method == EXACT_EXPM:
        if H.dimension > dense_cap:
            raise ResourceError(f"dimension {H.dimension} above dense cap {dense_cap}; use {TRUNCATED_BCH}")
        g = G.dense()
        result = scipy.linalg.expm(-g) @ H.dense() @ scipy.linalg.expm(g)
        return OperatorMatrix(basis=H.basis, matrix=sp.csr_matrix(result), label=label,
                              dropped_terms=H.dropped_terms, leaked_terms=H.leaked_terms + G.leaked_terms)

    if order < 1:
        raise InvalidArgumentError(f"BCH order must be >= 1, got {order}")
    term = H.matrix
    result = H.matrix.copy()
    for k in range(1, order + 1):
        term = (term @ G.matrix - G.matrix @ term) / k
        result = result + term
    remainder = operator_norm((term @ G.matrix - G.matrix @ term) / (order + 1))
    logger.debug(f"BCH conjugation to order {order}, remainder {remainder:.3e}")
    return OperatorMatrix(basis=H.basis, matrix=sp.csr_matrix(result), label=label,
                          dropped_terms=H.dropped_terms, leaked_terms=H.leaked_terms + G.leaked_terms,
                          info={'bch_remainder': remainder, 'bch_order': order})


@dataclass(frozen=True)
class EigenResult:
    eigenvalues: np.ndarray
    residuals: np.ndarray
    vectors: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals)) if self.residuals.size else 0.0


def exact_spectrum(H: OperatorMatrix, k: Optional[int] = None, dense_cap: int = DEFAULT_DENSE_CAP) -> EigenResult:
    """
    The k lowest eigenvalues of a hermitian operator, ascending, with residual norms.

    Args:
        H: Hermitian operator
        k: Number of eigenvalues; all of them when None
        dense_cap: Dimensions up to this use dense eigh, larger ones Lanczos

    Returns:
        EigenResult with eigenvalues, ‖Hv − λv‖ per pair and the eigenvectors as columns
    """
    dim = H.dimension
    k = dim if k is None else k
    if not 1 <= k <= dim:
        raise InvalidArgumentError(f"k must lie in 1..{dim}, got {k}")
    defect = H.hermiticity_defect()
    if defect > 1e-8 * max(1.0, H.norm()):
        raise InvalidArgumentError(f"operator {H.label!r} is not hermitian (defect {defect:.3e})")
    try:
        if dim <= dense_cap or k >= dim - 1:
            dense = H.dense()
            values, vectors = scipy.linalg.eigh(0.5 * (dense + dense.conj().T), subset_by_index=[0, k - 1])
        else:
            values, vectors = eigsh(H.matrix, k=k, which='SA')
            order = np.argsort(values)
            values, vectors = values[order], vectors[:, order]
    except (np.linalg.LinAlgError, ArpackNoConvergence) as e:
        raise NumericError(f"eigensolver failed on {H.label!r}: {e}") from e
    residuals = np.linalg.norm(H.matrix @ vectors - vectors * values, axis=0)
    return EigenResult(eigenvalues=values, residuals=residuals, vectors=vectors)
