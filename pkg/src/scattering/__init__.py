from src.scattering.born import BornTerms, born_second_order_continuum, born_terms, fourier_transform_radial
from src.scattering.eta import EtaTable, correlation_transform, eta_coefficients
from src.scattering.fourier_cache import FOURIER_CACHE, FourierCache
from src.scattering.potentials import (Potential, ScaledPotential, SquareWell, TabulatedPotential,
                                       load_grid_file)
from src.scattering.solver import ScatteringSolution, solve_zero_energy

__all__ = [
    'BornTerms', 'EtaTable', 'FOURIER_CACHE', 'FourierCache', 'Potential', 'ScaledPotential',
    'ScatteringSolution', 'SquareWell', 'TabulatedPotential', 'born_second_order_continuum',
    'born_terms', 'correlation_transform', 'eta_coefficients', 'fourier_transform_radial',
    'load_grid_file', 'solve_zero_energy',
]
