"""Born series terms of the scattering length and Fourier transforms of potentials."""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Union

from scipy import integrate

from src.errors import InvalidArgumentError, NumericError
from src.momentum_lattice import TWO_PI, Shell, ShellTable, enumerate_shells, lattice_sum
from src.scattering.fourier_cache import FOURIER_CACHE, FourierCache
from src.scattering.potentials import Potential

logger = logging.getLogger(__name__)

# Fraction of the table used to estimate the p⁴·V̂² tail constant.
_TAIL_WINDOW = 0.1


def fourier_transform_radial(potential: Potential, p_abs: float,
                             cache: Optional[FourierCache] = FOURIER_CACHE) -> float:
    """V̂(|p|) = (4π/|p|)∫ r·V(r)·sin(|p|r) dr, with V̂(0) = 4π∫ r²V dr."""
    if not math.isfinite(p_abs) or p_abs < 0:
        raise InvalidArgumentError(f"|p| must be finite and >= 0, got {p_abs}")
    if cache is None:
        return float(potential.fourier(p_abs))
    return cache.lookup(potential, p_abs)


@dataclass(frozen=True)
class BornTerms:
    a0: float
    a1: float
    tail_bound: float
    converged: bool
    n_max: int
    box_scale: float

    def to_dict(self):
        return {'a0': self.a0, 'a1': self.a1, 'tail_bound': self.tail_bound,
                'converged': self.converged, 'n_max': self.n_max, 'box_scale': self.box_scale}


def born_terms(potential: Potential, shells: Union[ShellTable, int], box_scale: float = 1.0,
               tolerance: float = 1e-6, threads: int = 1) -> BornTerms:
    """
    First and second Born terms on a periodic box of side box_scale.

    a0 = V̂(0)/8π and a1 = −(1/16π)·L⁻³·Σ_{p≠0} V̂(p)²/p² with p ∈ (2π/L)Z³.

    Args:
        potential: Potential to expand
        shells: Shell table, or cutoff n_max
        box_scale: Box side L; the unit box is the default
        tolerance: Tail bound below which the sum counts as converged
        threads: Worker threads for the V̂ evaluations

    Returns:
        BornTerms with the tail estimate of the truncated lattice sum
    """
    if not math.isfinite(box_scale) or box_scale <= 0:
        raise InvalidArgumentError(f"box_scale must be > 0, got {box_scale}")
    table = shells if isinstance(shells, ShellTable) else enumerate_shells(shells, representative_cap=0)
    a0 = fourier_transform_radial(potential, 0.0) / (8.0 * math.pi)

    def momentum(shell: Shell) -> float:
        return shell.p_abs / box_scale

    def summand(shell: Shell) -> float:
        p = momentum(shell)
        v = fourier_transform_radial(potential, p)
        return v * v / (p * p)

    total = lattice_sum(summand, table, threads=threads)
    prefactor = 1.0 / (16.0 * math.pi * box_scale ** 3)
    a1 = -prefactor * total.value

    # V̂² decays like C/p⁴; the remaining sum is ≈ C·(4π/3)K^{-3/2}/(2π/L)⁶
    K = table.n_max
    window = [s for s in table.occupied() if s.norm_sq_int >= (1.0 - _TAIL_WINDOW) * K]
    tail_constant = max((fourier_transform_radial(potential, momentum(s)) ** 2 * momentum(s) ** 4
                         for s in window), default=0.0)
    tail_bound = 2.0 * prefactor * tail_constant * (4.0 * math.pi / 3.0) * K ** -1.5 \
        / (TWO_PI / box_scale) ** 6
    converged = tail_bound <= tolerance
    if not converged:
        logger.warning(f"Second Born sum not converged at n_max={K}: tail bound {tail_bound:.3e} "
                       f"> {tolerance:.3e}")
    logger.info(f"Born terms a0={a0:.12g}, a1={a1:.12g} (tail {tail_bound:.2e}, L={box_scale})")
    return BornTerms(a0=a0, a1=a1, tail_bound=tail_bound, converged=converged, n_max=K,
                     box_scale=box_scale)


def born_second_order_continuum(potential: Potential) -> float:
    """
    Infinite-volume second Born term.

    8π·a1 = −½∫ V·(Δ⁻¹V) in real space, i.e. a1 = −¼∫ r²V(r)φ(r) dr with
    φ(r) = r⁻¹∫₀ʳ s²V(s) ds + ∫ᵣᴿ s·V(s) ds.
    """
    closed = potential.continuum_second_born()
    if closed is not None:
        return closed
    R = potential.support_radius
    points = [b for b in potential.breakpoints() if 0 < b < R][:48]

    def phi(r: float) -> float:
        inner = integrate.quad(lambda s: s * s * potential.value_at(s), 0.0, r, limit=200)[0] if r > 0 else 0.0
        outer = integrate.quad(lambda s: s * potential.value_at(s), r, R, limit=200)[0]
        return (inner / r if r > 0 else 0.0) + outer

    value, abserr = integrate.quad(lambda r: r * r * potential.value_at(r) * phi(r), 0.0, R,
                                   points=points or None, limit=200)
    if not math.isfinite(value):
        raise NumericError("continuum second Born quadrature failed", residual=abserr)
    return -0.25 * value
