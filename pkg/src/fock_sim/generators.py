"""Anti-hermitian generators B(η), B(τ), A, Ã and the cubic term C_N."""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

from src.errors import InvalidArgumentError, NumericError
from src.fock_sim.basis import EXCITATION_TRUNCATED, FockBasis
from src.fock_sim.operators import (A, A_DAG, B, B_DAG, PREFACTOR_SQRT, OperatorMatrix, Word,
                                    operator_norm, word_operator)
from src.momentum_lattice import TWO_PI_SQ, LatticeVector
from src.scattering import Potential, fourier_transform_radial

logger = logging.getLogger(__name__)

B_ETA = 'B_eta'
B_TAU = 'B_tau'
CUBIC_A = 'cubic_A'
CUBIC_ATILDE = 'cubic_Atilde'
GENERATOR_KINDS = (B_ETA, B_TAU, CUBIC_A, CUBIC_ATILDE)

# Relative anti-hermiticity defect tolerated before a built generator is rejected.
_SYMMETRY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class GeneratorSpec:
    """
    Which generator to build and its coefficient table keyed by shell norm |n|².

    Momentum sets are given as shell thresholds: the high set holds shells with
    |n|² ≥ high_min_norm, the low set shells with |n|² ≤ low_max_norm. For
    B_eta and B_tau only high_min_norm applies and restricts the pairing sum;
    unset, they run over every mode. cubic_A takes the low set just below the
    high one, and cubic_Atilde splits at (2π)²|n|² ≤ N.
    """

    kind: str
    coefficients: Mapping[int, float] = field(hash=False)
    high_min_norm: Optional[int] = None
    low_max_norm: Optional[int] = None
    ladder: str = B
    prefactor: str = PREFACTOR_SQRT

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise InvalidArgumentError(f"unknown generator kind {self.kind!r}")
        if self.ladder not in (A, B):
            raise InvalidArgumentError(f"ladder must be 'a' or 'b', got {self.ladder!r}")
        for norm, value in self.coefficients.items():
            if not math.isfinite(value):
                raise InvalidArgumentError(f"coefficient for shell {norm} is not finite: {value}")

    def cutoffs(self, N: int) -> Tuple[int, int]:
        """(high_min_norm, low_max_norm) with defaults applied."""
        if self.kind == CUBIC_ATILDE:
            low = self.low_max_norm if self.low_max_norm is not None else int(N // TWO_PI_SQ)
            high = self.high_min_norm if self.high_min_norm is not None else low + 1
        else:
            high = self.high_min_norm if self.high_min_norm is not None else 1
            low = self.low_max_norm if self.low_max_norm is not None else high - 1
        return high, low

    def coefficient(self, vector: LatticeVector) -> float:
        norm = vector.norm_sq_int
        if norm not in self.coefficients:
            raise InvalidArgumentError(f"{self.kind} has no coefficient for shell {norm} (mode {vector})")
        return float(self.coefficients[norm])


def _require_pairing_basis(basis: FockBasis, N: int):
    if basis.sector != EXCITATION_TRUNCATED:
        raise InvalidArgumentError("generators act on the excitation_truncated sector")
    if N != basis.N:
        raise InvalidArgumentError(f"N={N} does not match basis N={basis.N}")
    if not basis.modes.pairing_closed:
        raise InvalidArgumentError("generators need a mode set closed under p -> -p")


def _antisymmetrized(basis: FockBasis, terms: List[Tuple[float, Word]], label: str,
                     prefactor: str, dropped: int, sign: float = -1.0) -> OperatorMatrix:
    """X + sign·X†; sign = −1 gives a generator, +1 a hermitian term."""
    X = word_operator(basis, terms, label=label, prefactor=prefactor, dropped_terms=dropped)
    matrix = (X.matrix + sign * X.matrix.conj().T).tocsr()
    result = OperatorMatrix(basis=basis, matrix=matrix, label=label, dropped_terms=dropped,
                            leaked_terms=X.leaked_terms)
    scale = max(1.0, operator_norm(matrix))
    defect = result.anti_hermiticity_defect() if sign < 0 else result.hermiticity_defect()
    result.info['symmetry_defect'] = defect
    if defect > _SYMMETRY_TOLERANCE * scale:
        raise NumericError(f"{label} symmetry defect {defect:.3e} exceeds tolerance", residual=defect)
    return result


def build_generator(spec: GeneratorSpec, basis: FockBasis, N: int) -> OperatorMatrix:
    """
    Build the anti-hermitian generator G = X − X†.

    B_eta, B_tau: X = ½Σ_q c_q L†_q L†_{−q} with L the a or b ladder
    cubic_A:      X = N^{-1/2} Σ_{r∈P_H, v∈P_L} η_r b†_{r+v} a†_{−r} a_v
    cubic_Atilde: X = N^{-1/2} Σ_{r∈P̃_H, v∈P̃_L} η_r b†_{r+v} b†_{−r}(sinh(η_v) b†_{−v} + cosh(η_v) b_v)

    Args:
        spec: Generator kind, coefficients and momentum cutoffs
        basis: excitation_truncated basis over a pairing-closed mode set
        N: Particle number

    Returns:
        OperatorMatrix with dropped (momentum outside the set) and leaked term counts
    """
    _require_pairing_basis(basis, N)
    modes = basis.modes
    high, low = spec.cutoffs(N)
    terms: List[Tuple[float, Word]] = []
    dropped = 0

    if spec.kind in (B_ETA, B_TAU):
        dagger = B_DAG if spec.ladder == B else A_DAG
        for q in modes:
            if q.norm_sq_int >= high:
                terms.append((0.5 * spec.coefficient(q), [(q, dagger), (-q, dagger)]))
    else:
        cubic_scale = 1.0 / math.sqrt(N)
        high_modes = [r for r in modes if r.norm_sq_int >= high]
        low_modes = [v for v in modes if v.norm_sq_int <= low]
        for r in high_modes:
            eta_r = spec.coefficient(r)
            for v in low_modes:
                target = r + v
                if target.is_zero or target not in modes:
                    dropped += 1
                    continue
                if spec.kind == CUBIC_A:
                    terms.append((cubic_scale * eta_r, [(target, B_DAG), (-r, A_DAG), (v, A)]))
                else:
                    eta_v = spec.coefficient(v)
                    terms.append((cubic_scale * eta_r * math.sinh(eta_v),
                                  [(target, B_DAG), (-r, B_DAG), (-v, B_DAG)]))
                    terms.append((cubic_scale * eta_r * math.cosh(eta_v),
                                  [(target, B_DAG), (-r, B_DAG), (v, B)]))
    if dropped:
        logger.debug(f"{spec.kind}: dropped {dropped} terms leaving the mode set")
    if not terms:
        logger.warning(f"{spec.kind} is empty on this mode set (high shells >= {high}, low shells <= {low})")
    generator = _antisymmetrized(basis, terms, spec.kind, spec.prefactor, dropped)
    generator.info['terms'] = len(terms)
    logger.info(f"Built {spec.kind} on {basis.dimension} states ({len(terms)} terms, "
                f"{generator.leaked_terms} leaked)")
    return generator


def build_cubic_CN(basis: FockBasis, N: int, potential: Potential, eta: Mapping[int, float],
                   prefactor: str = PREFACTOR_SQRT) -> OperatorMatrix:
    """
    C_N = N^{-1/2} Σ_{p,q} V̂(|p|/N)[b†_{p+q} b†_{−p}(cosh(η_q) b_q + sinh(η_q) b†_{−q}) + h.c.].

    Args:
        basis: excitation_truncated basis over a pairing-closed mode set
        N: Particle number
        potential: Interaction potential
        eta: η coefficients keyed by shell norm
        prefactor: b-operator normalization

    Returns:
        Hermitian OperatorMatrix
    """
    _require_pairing_basis(basis, N)
    modes = basis.modes
    cubic_scale = 1.0 / math.sqrt(N)
    terms: List[Tuple[float, Word]] = []
    dropped = 0
    for p in modes:
        v_hat = fourier_transform_radial(potential, p.p_abs / N)
        for q in modes:
            target = p + q
            if target.is_zero or target not in modes:
                dropped += 1
                continue
            if q.norm_sq_int not in eta:
                raise InvalidArgumentError(f"C_N has no η coefficient for shell {q.norm_sq_int}")
            eta_q = float(eta[q.norm_sq_int])
            terms.append((cubic_scale * v_hat * math.cosh(eta_q), [(target, B_DAG), (-p, B_DAG), (q, B)]))
            terms.append((cubic_scale * v_hat * math.sinh(eta_q), [(target, B_DAG), (-p, B_DAG), (-q, B_DAG)]))
    return _antisymmetrized(basis, terms, 'C_N', prefactor, dropped, sign=1.0)


def coefficient_table(values: Mapping[int, float], norms) -> Dict[int, float]:
    """Restrict a shell-keyed table to the given norms, failing on gaps."""
    missing = [k for k in norms if k not in values]
    if missing:
        raise InvalidArgumentError(f"coefficient table misses shells {missing}")
    return {k: float(values[k]) for k in norms}
