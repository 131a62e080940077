"""Quadratic-transform coefficients η_p derived from the scattering profile.

With w = 1 − f and its radial Fourier transform

    W(k) = (4π/k)·[∫₀ᴿ (r − u(r))·sin(kr) dr + a·cos(kR)/k],

the coefficient attached to p ∈ Λ*₊ is η_p = −N⁻²·W(|p|/N). The outer part
of the transform, where r − u = a, is integrated in closed form.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Union

from scipy import integrate

from src.errors import InvalidArgumentError, NumericError
from src.momentum_lattice import Shell, ShellTable, enumerate_shells, evaluate_in_order
from src.scattering.solver import ScatteringSolution

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EtaTable:
    n_particles: int
    values: Dict[int, float]
    decay_constant: float

    def value(self, norm_sq_int: int) -> float:
        if norm_sq_int not in self.values:
            raise InvalidArgumentError(f"no η coefficient for shell {norm_sq_int}")
        return self.values[norm_sq_int]

    def to_rows(self) -> List[tuple]:
        return sorted(self.values.items())


def correlation_transform(solution: ScatteringSolution, k: float) -> float:
    """W(k) for k > 0."""
    if k <= 0:
        raise InvalidArgumentError(f"transform momentum must be > 0, got {k}")
    R = solution.potential.support_radius
    a = solution.scattering_length
    profile = solution.profile
    inner, abserr = integrate.quad(lambda r: r - profile(r), 0.0, R, weight='sin', wvar=k,
                                   epsabs=1e-14, epsrel=1e-11, limit=200)
    if not math.isfinite(inner):
        raise NumericError(f"correlation transform quadrature failed at k={k}", residual=abserr)
    return 4.0 * math.pi / k * (inner + a * math.cos(k * R) / k)


def eta_coefficients(solution: ScatteringSolution, n_particles: int,
                     shells: Union[ShellTable, int], max_residual: float = 1e-6,
                     threads: int = 1) -> EtaTable:
    """
    η_p = −N⁻²·W(|p|/N) on every occupied shell of the table.

    Args:
        solution: Solved zero-energy scattering problem
        n_particles: Particle number N
        shells: Shell table, or cutoff n_max
        max_residual: Largest solver residual accepted for this derived quantity
        threads: Worker threads for the per-shell quadratures

    Returns:
        EtaTable keyed by integer shell norm
    """
    if n_particles < 1:
        raise InvalidArgumentError(f"N must be >= 1, got {n_particles}")
    if solution.residual > max_residual:
        raise InvalidArgumentError(f"scattering residual {solution.residual:.3e} too large for η "
                                   f"(limit {max_residual:.1e})")
    table = shells if isinstance(shells, ShellTable) else enumerate_shells(shells, representative_cap=0)
    occupied = table.occupied()
    N = float(n_particles)

    def coefficient(shell: Shell) -> float:
        return -correlation_transform(solution, shell.p_abs / N) / (N * N)

    values = dict(zip((s.norm_sq_int for s in occupied), evaluate_in_order(coefficient, occupied, threads)))
    decay = max((abs(values[s.norm_sq_int]) * s.p_squared for s in occupied), default=0.0)
    logger.debug(f"Computed η on {len(values)} shells for N={n_particles}, decay constant {decay:.6g}")
    return EtaTable(n_particles=n_particles, values=values, decay_constant=decay)
