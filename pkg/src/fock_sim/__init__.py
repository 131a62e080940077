from src.fock_sim.basis import (EXCITATION_TRUNCATED, FIXED_TOTAL, FockBasis, ModeSet, build_basis,
                                stars_and_bars)
from src.fock_sim.excitation import ExcitationMap, excitation_map
from src.fock_sim.generators import (B_ETA, B_TAU, CUBIC_A, CUBIC_ATILDE, GENERATOR_KINDS, GeneratorSpec,
                                     build_cubic_CN, build_generator)
from src.fock_sim.operators import (A, A_DAG, B, B_DAG, OperatorMatrix, build_hamiltonian, excitation_number,
                                    identity, ladder_ops, number_operator, word_operator)
from src.fock_sim.pipeline import SimulationReport, SimulationSettings, generator_spec, run_pipeline
from src.fock_sim.transforms import (EXACT_EXPM, TRUNCATED_BCH, EigenResult, LocalizationProfile, conjugate,
                                     exact_spectrum, localization_ops, localization_split, partition_defect)

__all__ = [
    'A', 'A_DAG', 'B', 'B_DAG', 'B_ETA', 'B_TAU', 'CUBIC_A', 'CUBIC_ATILDE', 'EXACT_EXPM',
    'EXCITATION_TRUNCATED', 'FIXED_TOTAL', 'GENERATOR_KINDS', 'TRUNCATED_BCH', 'EigenResult',
    'ExcitationMap', 'FockBasis', 'GeneratorSpec', 'LocalizationProfile', 'ModeSet', 'OperatorMatrix',
    'SimulationReport', 'SimulationSettings', 'build_basis', 'build_cubic_CN', 'build_generator',
    'build_hamiltonian', 'conjugate', 'exact_spectrum', 'excitation_map', 'excitation_number', 'generator_spec',
    'identity', 'ladder_ops', 'localization_ops', 'localization_split', 'number_operator', 'partition_defect',
    'run_pipeline', 'stars_and_bars', 'word_operator',
]
