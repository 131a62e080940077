"""Closed-form Bogoliubov quantities for the periodic unit box.

Dispersion relations, the two-mode quadratic diagonalization, the boundary
constant e_Λ, the order-one correction sum and the assembled ground-state
energy 4π(N−1)a + e_Λa² + correction.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from src.errors import DomainError, InvalidArgumentError, NumericError
from src.momentum_lattice import (TWO_PI_SQ, CompensatedSum, Shell, ShellTable, enumerate_shells,
                                  lattice_sum)

logger = logging.getLogger(__name__)

FREE = 'free'
GROSS_PITAEVSKII = 'gross_pitaevskii'
MEAN_FIELD = 'mean_field'
DISPERSION_VARIANTS = (FREE, GROSS_PITAEVSKII, MEAN_FIELD)

CUBE_CUTOFF_AVERAGE = 'cube_cutoff_average'
RICHARDSON = 'richardson'
E_LAMBDA_SCHEMES = (CUBE_CUTOFF_AVERAGE, RICHARDSON)
E_LAMBDA_MIN_M = 20
# Scheme spread beyond this multiple of their own errors counts as non-convergence.
E_LAMBDA_SPREAD_FACTOR = 10.0


@dataclass(frozen=True)
class DispersionModel:
    """Single-quantum excitation energy E(p) as a function of p² = (2π)²k."""

    variant: str
    a: float = 0.0
    v_hat: Optional[Callable[[float], float]] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.variant not in DISPERSION_VARIANTS:
            raise InvalidArgumentError(f"unknown dispersion variant {self.variant!r}")
        if not math.isfinite(self.a) or self.a < 0:
            raise InvalidArgumentError(f"scattering length must be finite and >= 0, got {self.a}")
        if self.variant == MEAN_FIELD and self.v_hat is None:
            raise InvalidArgumentError("mean_field dispersion needs a V̂ function")

    @classmethod
    def free(cls) -> 'DispersionModel':
        return cls(FREE)

    @classmethod
    def gross_pitaevskii(cls, a: float) -> 'DispersionModel':
        return cls(GROSS_PITAEVSKII, a=a)

    @classmethod
    def mean_field(cls, v_hat: Callable[[float], float]) -> 'DispersionModel':
        return cls(MEAN_FIELD, v_hat=v_hat)

    @property
    def integer_keyed(self) -> bool:
        """True when E(k) = (2π)²k, so energies compare as integers."""
        return self.variant == FREE or (self.variant == GROSS_PITAEVSKII and self.a == 0)

    def energy(self, norm_sq_int: int) -> float:
        if norm_sq_int < 1:
            raise InvalidArgumentError(f"dispersion is defined on shells >= 1, got {norm_sq_int}")
        p2 = TWO_PI_SQ * norm_sq_int
        if self.integer_keyed:
            return p2
        if self.variant == GROSS_PITAEVSKII:
            return math.sqrt(p2 * p2 + 16.0 * math.pi * self.a * p2)
        radicand = p2 * p2 + 2.0 * self.v_hat(math.sqrt(p2)) * p2
        if radicand < 0:
            raise DomainError(f"mean-field radicand negative on shell {norm_sq_int}: {radicand}")
        return math.sqrt(radicand)

    def describe(self) -> Dict:
        return {'variant': self.variant, 'a': self.a}


def dispersion(model: DispersionModel, shell: Union[Shell, int]) -> float:
    norm = shell.norm_sq_int if isinstance(shell, Shell) else int(shell)
    return model.energy(norm)


def dispersion_curve(model: DispersionModel, shells: ShellTable) -> List[Tuple[int, float, float]]:
    """(norm_sq_int, |p|, E) rows for every occupied shell, for plotting."""
    return [(s.norm_sq_int, s.p_abs, model.energy(s.norm_sq_int)) for s in shells.occupied()]


@dataclass(frozen=True)
class QuadDiagonalization:
    A: float
    B: float
    tau: float
    eps: float
    ground_shift: float

    def to_dict(self) -> Dict[str, float]:
        return {'A': self.A, 'B': self.B, 'tau': self.tau, 'eps': self.eps,
                'ground_shift': self.ground_shift}


def quad_diagonalize(A: float, B: float) -> QuadDiagonalization:
    """
    Diagonalize A(a†₊a₊ + a†₋a₋) + B(a†₊a†₋ + a₊a₋).

    Args:
        A: Diagonal coefficient
        B: Pairing coefficient

    Returns:
        QuadDiagonalization with tanh(2τ) = −B/A, eps = √(A²−B²), ground_shift = eps − A
    """
    if not (math.isfinite(A) and math.isfinite(B)):
        raise InvalidArgumentError(f"coefficients must be finite, got A={A}, B={B}")
    if A <= abs(B):
        raise DomainError(f"no Bogoliubov transformation for A={A} <= |B|={abs(B)}")
    eps = math.sqrt((A - B) * (A + B))
    tau = 0.5 * math.atanh(-B / A)
    return QuadDiagonalization(A=A, B=B, tau=tau, eps=eps, ground_shift=eps - A)


def bogoliubov_tau(a: float, shell: Union[Shell, int]) -> float:
    """τ_p diagonalizing p²+8πa against the 8πa pairing term."""
    norm = shell.norm_sq_int if isinstance(shell, Shell) else int(shell)
    if norm < 1:
        raise InvalidArgumentError(f"τ is defined on shells >= 1, got {norm}")
    c = 8.0 * math.pi * a
    return quad_diagonalize(TWO_PI_SQ * norm + c, c).tau


def cube_partial_sums(M_max: int) -> np.ndarray:
    """
    S_M = Σ_{0 ≠ n ∈ Z³, max|nᵢ| ≤ M} cos(|n|)/|n|² for M = 0..M_max.

    Slices of fixed n₁ are summed with numpy and binned by max-norm, so each
    increment S_M − S_{M−1} is the sum over the surface of the cube of side M.
    """
    if M_max < 1:
        raise InvalidArgumentError(f"M_max must be >= 1, got {M_max}")
    m = np.arange(-M_max, M_max + 1, dtype=np.int64)
    n2, n3 = np.meshgrid(m, m, indexing='ij')
    face_sq = n2 * n2 + n3 * n3
    face_max = np.maximum(np.abs(n2), np.abs(n3))
    increments = np.zeros(M_max + 1)
    for n1 in range(M_max + 1):
        k = (n1 * n1 + face_sq).astype(float)
        nonzero = k > 0
        terms = np.zeros_like(k)
        terms[nonzero] = np.cos(np.sqrt(k[nonzero])) / k[nonzero]
        shell = np.maximum(face_max, n1)
        weight = 1.0 if n1 == 0 else 2.0
        increments += weight * np.bincount(shell.ravel(), weights=terms.ravel(), minlength=M_max + 1)
    partial = np.empty(M_max + 1)
    acc = CompensatedSum()
    for M in range(M_max + 1):
        acc.add(float(increments[M]))
        partial[M] = acc.value
    return partial


def _hann_average(partial: np.ndarray, lo: int, hi: int) -> float:
    m = np.arange(lo, hi + 1)
    weights = np.sin(np.pi * (m - lo) / (hi - lo)) ** 2
    return float(np.dot(weights, partial[lo:hi + 1]) / weights.sum())


def _cube_average(partial: np.ndarray, M: int) -> float:
    return _hann_average(partial, M // 2, M)


def _richardson(partial: np.ndarray, M: int) -> float:
    return (4.0 * _cube_average(partial, M) - _cube_average(partial, M // 2)) / 3.0


_SCHEMES = {CUBE_CUTOFF_AVERAGE: _cube_average, RICHARDSON: _richardson}


@dataclass(frozen=True)
class ELambda:
    value: float
    error_estimate: float
    scheme: str
    M_max: int
    values_by_scheme: Dict[str, float]
    errors_by_scheme: Dict[str, float]

    def to_dict(self) -> Dict:
        return {'value': self.value, 'error_estimate': self.error_estimate, 'scheme': self.scheme,
                'M_max': self.M_max, 'values_by_scheme': dict(self.values_by_scheme),
                'errors_by_scheme': dict(self.errors_by_scheme)}


def e_lambda(M_max: int = 200, scheme: str = CUBE_CUTOFF_AVERAGE) -> ELambda:
    """
    Boundary constant e_Λ = 2 − lim_M S_M over cube cutoffs.

    The partial sums oscillate in M; cube_cutoff_average takes a Hann-weighted
    mean of S_m over m ∈ [M/2, M], richardson removes the leading 1/M² bias of
    that mean. Each scheme's own error is its change from the 3M/4 cutoff.

    Args:
        M_max: Largest cube half-side, at least 20
        scheme: cube_cutoff_average or richardson

    Returns:
        ELambda with the selected value and the spread-based error estimate
    """
    if M_max < E_LAMBDA_MIN_M:
        raise InvalidArgumentError(f"M_max must be >= {E_LAMBDA_MIN_M}, got {M_max}")
    if scheme not in _SCHEMES:
        raise InvalidArgumentError(f"unknown e_Λ scheme {scheme!r}")
    partial = cube_partial_sums(M_max)
    values = {}
    errors = {}
    for name, combine in _SCHEMES.items():
        values[name] = 2.0 - combine(partial, M_max)
        errors[name] = abs(values[name] - (2.0 - combine(partial, (3 * M_max) // 4)))
    spread = abs(values[CUBE_CUTOFF_AVERAGE] - values[RICHARDSON])
    if spread > E_LAMBDA_SPREAD_FACTOR * max(errors.values()):
        raise NumericError(f"e_Λ schemes disagree by {spread:.3e} at M_max={M_max} "
                           f"(own errors {errors})", residual=spread)
    error_estimate = max(errors[scheme], spread)
    logger.info(f"e_Λ={values[scheme]:.10f} ({scheme}, M_max={M_max}, error {error_estimate:.2e})")
    return ELambda(value=values[scheme], error_estimate=error_estimate, scheme=scheme, M_max=M_max,
                   values_by_scheme=values, errors_by_scheme=errors)


def correction_summand(a: float, p_squared: float) -> float:
    """
    Per-vector p²+8πa − √(p⁴+16πa p²) − (8πa)²/(2p²), in cancellation-free form.

    With c = 8πa and E = √(p⁴+2cp²) the summand equals
    −c³(3p²+E) / (2p²(p²+c+E)(p²+E)); it is ≤ 0 and tends to −c³/(2p⁴).
    """
    c = 8.0 * math.pi * a
    if c == 0:
        return 0.0
    energy = math.sqrt(p_squared * p_squared + 2.0 * c * p_squared)
    return -c ** 3 * (3.0 * p_squared + energy) / (
        2.0 * p_squared * (p_squared + c + energy) * (p_squared + energy))


@dataclass(frozen=True)
class CorrectionSum:
    value: float
    tail_bound: float
    n_max: int
    partial_values: Tuple[float, ...] = field(repr=False)


def correction_sum(a: float, shells: Union[ShellTable, int], threads: int = 1) -> CorrectionSum:
    """
    −½ Σ_{p∈Λ*₊} [p²+8πa − √(p⁴+16πa p²) − (8πa)²/(2p²)] up to the table cutoff.

    The tail beyond |n|² = K is bounded through |summand| ≤ (8πa)³/(2p⁴) and
    the shell count ≈ 2π√k, giving (8πa)³/(8π³√K).
    """
    if not math.isfinite(a) or a < 0:
        raise InvalidArgumentError(f"scattering length must be finite and >= 0, got {a}")
    table = shells if isinstance(shells, ShellTable) else enumerate_shells(shells, representative_cap=0)
    total = lattice_sum(lambda s: correction_summand(a, s.p_squared), table, threads=threads)
    c = 8.0 * math.pi * a
    tail_bound = c ** 3 / (8.0 * math.pi ** 3 * math.sqrt(table.n_max))
    value = -0.5 * total.value
    logger.debug(f"Correction sum {value:.12g} at n_max={table.n_max} (tail {tail_bound:.2e})")
    return CorrectionSum(value=value, tail_bound=tail_bound, n_max=table.n_max,
                         partial_values=tuple(-0.5 * s for s in total.partial_sums))


@dataclass(frozen=True)
class EnergyBreakdown:
    n_particles: int
    a: float
    e_lambda: float
    term_main: float
    term_boundary: float
    term_correction: float
    total: float
    tail_bound: float = 0.0

    def to_dict(self) -> Dict:
        return {'n_particles': self.n_particles, 'a': self.a, 'e_lambda': self.e_lambda,
                'term_main': self.term_main, 'term_boundary': self.term_boundary,
                'term_correction': self.term_correction, 'total': self.total,
                'tail_bound': self.tail_bound}


def ground_state_energy(N: int, a: float, e_lambda_value: float, correction: float,
                        tail_bound: float = 0.0) -> EnergyBreakdown:
    """
    Assemble 4π(N−1)a + e_Λa² + correction.

    Args:
        N: Particle number, at least 2
        a: Scattering length
        e_lambda_value: Boundary constant e_Λ
        correction: Value of correction_sum
        tail_bound: Truncation error of the correction, carried into the report

    Returns:
        EnergyBreakdown whose total is the left-to-right sum of the three terms
    """
    if N < 2:
        raise InvalidArgumentError(f"N must be >= 2, got {N}")
    if not math.isfinite(a) or a < 0:
        raise InvalidArgumentError(f"scattering length must be finite and >= 0, got {a}")
    term_main = 4.0 * math.pi * (N - 1) * a
    term_boundary = e_lambda_value * a * a
    total = term_main + term_boundary + correction
    return EnergyBreakdown(n_particles=N, a=a, e_lambda=e_lambda_value, term_main=term_main,
                           term_boundary=term_boundary, term_correction=correction, total=total,
                           tail_bound=tail_bound)
