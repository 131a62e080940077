"""Command-line entry point: scattering, constants, energy, spectrum, simulate."""
import argparse
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, TextIO, Tuple

from src import __version__
from src.bogoliubov_formulas import (FREE, GROSS_PITAEVSKII, MEAN_FIELD, DispersionModel, bogoliubov_tau,
                                     correction_sum, dispersion_curve, e_lambda, ground_state_energy)
from src.config_manager import ConfigManager, RunConfig
from src.errors import InvalidArgumentError, LabError, NumericError
from src.fock_sim import SimulationSettings, run_pipeline
from src.momentum_lattice import TWO_PI_SQ, LatticeVector, enumerate_shells
from src.report_writer import (Table, dumps_json, dumps_tables, stream_rows, write_operators, write_tables,
                               write_text)
from src.scattering import (Potential, ScaledPotential, SquareWell, born_second_order_continuum, born_terms,
                            eta_coefficients, fourier_transform_radial, load_grid_file, solve_zero_energy)
from src.spectrum_enumeration import SpectrumRequest, enumerate_spectrum, iter_spectrum, spectrum_staircase

logger = logging.getLogger(__name__)

COMMANDS = ('scattering', 'constants', 'energy', 'spectrum', 'simulate')
EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3
SPECTRUM_COLUMNS = ('energy', 'multiplicity', 'composition')

# r_max used when the configuration leaves it at 0, in units of the support radius
_DEFAULT_R_MAX_FACTOR = 3.0

_FORMULAS = {
    'scattering_length': "8πa = ∫ V f with (−Δ + ½V) f = 0, f → 1 at infinity",
    'born_first': "a⁽⁰⁾ = V̂(0)/8π",
    'born_second': "a⁽¹⁾ = −(16π)⁻¹ Σ_{p≠0} V̂(p)²/p² over the unit-box lattice",
    'born_second_continuum': "a⁽¹⁾ in infinite volume, −(16π)⁻¹ ∫ V̂(p)²/p² d³p/(2π)³",
    'e_lambda': "e_Λ = 2 − lim_{M→∞} Σ_{0<max|nᵢ|≤M} cos(|n|)/|n|²",
    'ground_state_energy': "E_N = 4π(N−1)a + e_Λ a² − ½ Σ_p [p² + 8πa − √(p⁴+16πap²) − (8πa)²/(2p²)]",
    'dispersion': "E(p) = √(p⁴ + 16πa p²)",
    'dispersion_free': "E(p) = p²",
    'dispersion_mean_field': "E(p) = √(p⁴ + 2V̂(p/N) p²)",
    'excitation_spectrum': "Σ_p n_p E(p) ≤ ζ with multiplicities",
    'eta': "η_p = −N⁻²·ŵ(|p|/N), ŵ the continuum transform of w = 1 − f (stand-in coefficients)",
    'pipeline': "e^{−B(τ)} e^{−Ã} e^{−B(η)} U_N H_N U_N* e^{B(η)} e^{Ã} e^{B(τ)} by exact diagonalization",
}


@dataclass
class RunReport:
    command: str
    version: str = __version__
    inputs: Dict = field(default_factory=dict)
    results: Dict = field(default_factory=dict)
    estimates: Dict = field(default_factory=dict)
    realizes: Dict[str, str] = field(default_factory=dict)
    tables: Dict[str, Table] = field(default_factory=dict)
    operators: Dict = field(default_factory=dict)
    runtime: Dict = field(default_factory=dict)

    def to_dict(self, include_runtime: bool = True) -> Dict:
        """JSON-ready report; runtime (wall time, threads) is the only run-dependent part."""
        out = {'command': self.command, 'version': self.version, 'inputs': self.inputs,
               'results': self.results, 'estimates': self.estimates, 'realizes': self.realizes}
        if include_runtime:
            out['runtime'] = self.runtime
        return out


def build_potential(config: RunConfig) -> Potential:
    section = config.potential
    if section.kind == 'square_well':
        potential = SquareWell(depth=section.depth, radius=section.radius)
    else:
        potential = load_grid_file(section.grid_file, support_radius=section.support_radius)
    if section.scale != 1.0:
        potential = ScaledPotential(scale=section.scale, inner=potential)
    return potential


def _r_max(config: RunConfig, potential: Potential) -> float:
    if config.system.r_max > 0:
        return config.system.r_max
    return _DEFAULT_R_MAX_FACTOR * potential.support_radius


def _solve(config: RunConfig, potential: Potential):
    return solve_zero_energy(potential, _r_max(config, potential), tolerance=config.system.tolerance)


def resolve_scattering_length(config: RunConfig, potential: Potential, threads: int,
                              report: RunReport) -> float:
    """The a used by energy/spectrum/simulate, labelled in the report by its source."""
    source = config.system.scattering_length_source
    report.results['scattering_length_source'] = source
    if source == 'value':
        a = config.system.scattering_length
        if a < 0:
            raise InvalidArgumentError(f"system.scattering_length must be >= 0, got {a}")
    elif source == 'born':
        born = born_terms(potential, config.lattice.n_max, box_scale=config.lattice.born_box_scale,
                          tolerance=config.lattice.born_tolerance, threads=threads)
        a = born.a0 + born.a1
        report.estimates['born_tail_bound'] = born.tail_bound
        report.realizes['scattering_length'] = f"{_FORMULAS['born_first']} plus {_FORMULAS['born_second']}"
    else:
        solution = _solve(config, potential)
        a = solution.scattering_length
        report.estimates['scattering_residual'] = solution.residual
        report.realizes['scattering_length'] = _FORMULAS['scattering_length']
    if not math.isfinite(a) or a < 0:
        raise NumericError(f"scattering length from {source} is not usable: {a}")
    report.results['scattering_length'] = a
    logger.info(f"Using a={a:.12g} from {source}")
    return a


def _run_scattering(config: RunConfig, threads: int, seed: int, report: RunReport):
    potential = build_potential(config)
    solution = _solve(config, potential)
    born = born_terms(potential, config.lattice.n_max, box_scale=config.lattice.born_box_scale,
                      tolerance=config.lattice.born_tolerance, threads=threads)
    report.results.update({
        'potential': potential.describe(),
        'a_integral': solution.a_integral,
        'a_asymptotic': solution.a_asymptotic,
        'a0': born.a0,
        'a1': born.a1,
        'a1_continuum': born_second_order_continuum(potential),
        'born_converged': born.converged,
    })
    exact = potential.exact_scattering_length()
    if exact is not None:
        report.results['a_closed_form'] = exact
    report.estimates.update({
        'scattering_residual': solution.residual,
        'integral_vs_asymptotic': abs(solution.a_integral - solution.a_asymptotic),
        'born_tail_bound': born.tail_bound,
    })
    report.realizes.update({'a_integral': _FORMULAS['scattering_length'],
                            'a_asymptotic': "f(r) = 1 − a/r outside the support",
                            'a0': _FORMULAS['born_first'], 'a1': _FORMULAS['born_second'],
                            'a1_continuum': _FORMULAS['born_second_continuum']})
    report.tables['profile'] = Table(('r', 'u', 'f'), solution.to_rows())


def _run_constants(config: RunConfig, threads: int, seed: int, report: RunReport):
    result = e_lambda(config.lattice.e_lambda_m_max, config.lattice.e_lambda_scheme)
    report.results['e_lambda'] = result.value
    report.results['e_lambda_by_scheme'] = result.values_by_scheme
    report.results['scheme'] = result.scheme
    report.results['M_max'] = result.M_max
    report.estimates['e_lambda'] = result.error_estimate
    report.estimates['e_lambda_by_scheme'] = result.errors_by_scheme
    report.realizes['e_lambda'] = _FORMULAS['e_lambda']
    rows = [('e_lambda', result.value, result.error_estimate)]
    rows.extend((f"e_lambda.{name}", result.values_by_scheme[name], result.errors_by_scheme[name])
                for name in sorted(result.values_by_scheme))
    report.tables['constants'] = Table(('name', 'value', 'error'), rows)


def _run_energy(config: RunConfig, threads: int, seed: int, report: RunReport):
    potential = build_potential(config)
    a = resolve_scattering_length(config, potential, threads, report)
    constant = e_lambda(config.lattice.e_lambda_m_max, config.lattice.e_lambda_scheme)
    shells = enumerate_shells(config.lattice.n_max, representative_cap=0)
    correction = correction_sum(a, shells, threads=threads)
    breakdown = ground_state_energy(config.system.n_particles, a, constant.value, correction.value,
                                    tail_bound=correction.tail_bound)
    report.results['energy'] = breakdown.to_dict()
    report.tables['energy'] = Table(('term', 'value'), list(breakdown.to_dict().items()))
    report.tables['correction'] = Table(
        ('norm_sq_int', 'degeneracy', 'cumulative'),
        [(norm, degeneracy, partial) for (norm, degeneracy), partial
         in zip(shells.to_rows(), correction.partial_values)])
    report.estimates['correction_tail_bound'] = correction.tail_bound
    report.estimates['e_lambda'] = constant.error_estimate
    report.estimates['energy_total'] = correction.tail_bound + constant.error_estimate * a * a
    report.realizes['energy'] = _FORMULAS['ground_state_energy']
    report.realizes['e_lambda'] = _FORMULAS['e_lambda']


def dispersion_model(config: RunConfig, potential: Potential, a: float) -> DispersionModel:
    variant = config.spectrum.dispersion
    if variant == FREE:
        return DispersionModel.free()
    if variant == GROSS_PITAEVSKII:
        return DispersionModel.gross_pitaevskii(a)
    N = config.system.n_particles
    return DispersionModel.mean_field(lambda p: fourier_transform_radial(potential, p / N))


def spectrum_cutoff(model: DispersionModel, zeta: float, configured: Optional[int]) -> int:
    """Configured n_max, or the smallest one with E(n_max) > ζ."""
    if configured is not None:
        return configured
    n = max(1, int(zeta // TWO_PI_SQ))
    while not model.energy(n) > zeta:
        n += 1
    return n


def spectrum_request(config: RunConfig, threads: int, report: RunReport) -> SpectrumRequest:
    section = config.spectrum
    if section.dispersion == FREE:
        potential, a = None, 0.0
    else:
        potential = build_potential(config)
        a = resolve_scattering_length(config, potential, threads, report) \
            if section.dispersion == GROSS_PITAEVSKII else 0.0
    model = dispersion_model(config, potential, a)
    shells = enumerate_shells(spectrum_cutoff(model, section.zeta, section.n_max), representative_cap=0)
    return SpectrumRequest(model=model, zeta=section.zeta, shells=shells, include_boundary=section.include_boundary)


def _run_spectrum(config: RunConfig, threads: int, seed: int, report: RunReport):
    section = config.spectrum
    request = spectrum_request(config, threads, report)
    model, shells = request.model, request.shells
    lines = enumerate_spectrum(request, threads=threads)
    report.results['dispersion'] = model.describe()
    report.results['shell_cutoff'] = shells.n_max
    report.results['lines'] = [{'energy': line.energy, 'multiplicity': line.multiplicity,
                                'composition': line.to_row()[2]} for line in lines]
    report.results['total_states'] = sum(line.multiplicity for line in lines)
    key = {FREE: 'dispersion_free', GROSS_PITAEVSKII: 'dispersion', MEAN_FIELD: 'dispersion_mean_field'}
    report.realizes['dispersion'] = _FORMULAS[key[section.dispersion]]
    report.realizes['lines'] = _FORMULAS['excitation_spectrum']
    report.tables['spectrum'] = Table(SPECTRUM_COLUMNS, [x.to_row() for x in lines])
    report.tables['staircase'] = Table(('energy', 'count'), spectrum_staircase(lines))
    report.tables['dispersion'] = Table(('p_abs', 'energy'),
                                        [(p, e) for _, p, e in dispersion_curve(model, shells)])


def _run_simulate(config: RunConfig, threads: int, seed: int, report: RunReport):
    fock = config.fock
    potential = build_potential(config)
    modes = tuple(LatticeVector(tuple(m)) for m in fock.modes)
    a = resolve_scattering_length(config, potential, threads, report)
    norms = sorted({m.norm_sq_int for m in modes if not m.is_zero})
    if not norms:
        raise InvalidArgumentError("fock.modes must contain at least one nonzero mode")
    solution = _solve(config, potential)
    eta = eta_coefficients(solution, fock.n_particles, enumerate_shells(norms[-1], representative_cap=0),
                           threads=threads)
    tau = {k: bogoliubov_tau(a, k) for k in norms}
    settings = SimulationSettings(modes=modes, n_particles=fock.n_particles, prefactor=fock.b_prefactor,
                                  generators=fock.generators, high_min_norm=fock.high_min_norm,
                                  low_max_norm=fock.low_max_norm, pairing_min_norm=fock.pairing_min_norm,
                                  localization_m=fock.localization_m,
                                  random_states=fock.random_states, conjugation=fock.conjugation,
                                  bch_order=fock.bch_order, eigenvalues=fock.eigenvalues)
    pipeline = run_pipeline(potential, settings, eta=eta.values, tau=tau, seed=seed)
    report.results['coefficients'] = {'eta': {k: eta.values[k] for k in norms}, 'tau': tau}
    report.results['pipeline'] = pipeline.to_dict()
    report.estimates['max_spectrum_drift'] = pipeline.checks['max_spectrum_drift']
    report.estimates['vacuum_energy_defect'] = pipeline.checks['vacuum_energy_defect']
    report.realizes['pipeline'] = _FORMULAS['pipeline']
    report.realizes['eta'] = _FORMULAS['eta']
    report.realizes['vacuum_energy'] = "⟨Ω, U_N H_N U_N* Ω⟩ = (N−1)V̂(0)/2"
    report.tables['spectrum'] = Table(('index', 'energy'),
                                      list(enumerate(pipeline.spectra['excitation_hamiltonian'])))
    report.tables['steps'] = Table(('generator', 'terms', 'generator_norm', 'spectrum_drift'),
                                   [(s['generator'], s['terms'], s['generator_norm'], s['spectrum_drift'])
                                    for s in pipeline.steps])
    report.operators = pipeline.operators


_RUNNERS = {
    'scattering': _run_scattering,
    'constants': _run_constants,
    'energy': _run_energy,
    'spectrum': _run_spectrum,
    'simulate': _run_simulate,
}


def run(command: str, config: RunConfig, threads: int = 1, seed: int = 0) -> RunReport:
    """
    Execute one command on a validated configuration.

    Args:
        command: One of scattering, constants, energy, spectrum, simulate
        config: Parsed configuration
        threads: Worker threads used inside the computation modules
        seed: Seed for the random test states of simulate

    Returns:
        RunReport; raises LabError subclasses on validation or numeric failure
    """
    if command not in _RUNNERS:
        raise InvalidArgumentError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    if threads < 1:
        raise InvalidArgumentError(f"--threads must be >= 1, got {threads}")
    report = RunReport(command=command, inputs={'config': config.to_dict(), 'seed': seed})
    started = time.perf_counter()
    _RUNNERS[command](config, threads, seed, report)
    report.runtime = {'wall_time': time.perf_counter() - started, 'threads': threads}
    logger.info(f"{command} finished in {report.runtime['wall_time']:.3f} s")
    return report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='bogoliubov-lab',
                                     description="Bogoliubov theory of the dilute Bose gas in a unit box")
    parser.add_argument('command', choices=COMMANDS, help="computation to run")
    parser.add_argument('--config', default=None, help="sectioned config file (defaults are built in)")
    parser.add_argument('--csv', action='store_true', help="emit CSV tables instead of the JSON report")
    parser.add_argument('--out', default=None, help="output path (standard output when omitted)")
    parser.add_argument('--threads', type=int, default=1, help="worker threads inside the computation")
    parser.add_argument('--seed', type=int, default=0, help="seed for random test states in simulate")
    parser.add_argument('--stream', action='store_true',
                        help="spectrum only: write CSV lines while they are enumerated")
    parser.add_argument('--export', default=None, metavar='DIR',
                        help="simulate only: dump the pipeline operators as sparse triplet files")
    parser.add_argument('--log-level', default='INFO', choices=('DEBUG', 'INFO', 'WARNING', 'ERROR'))
    parser.add_argument('--log-file', default=None, help="also write the log to this file")
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    return parser


def stream_spectrum(config: RunConfig, threads: int, out_path: Optional[str], stream: TextIO) -> int:
    """Write spectrum lines as CSV in ascending energy while they are enumerated; returns the line count."""
    if threads < 1:
        raise InvalidArgumentError(f"--threads must be >= 1, got {threads}")
    request = spectrum_request(config, threads, RunReport(command='spectrum'))
    rows = (line.to_row() for line in iter_spectrum(request))
    return stream_rows(SPECTRUM_COLUMNS, rows, out_path, stream)


def emit(report: RunReport, config: RunConfig, as_csv: bool, out_path: Optional[str],
         stream: TextIO) -> None:
    as_csv = as_csv or config.output.format == 'csv'
    out_path = out_path or config.output.path or None
    if not as_csv:
        write_text(dumps_json(report.to_dict()), out_path, stream)
    elif out_path:
        write_tables(report.tables, out_path)
    else:
        stream.write(dumps_tables(report.tables))


def main(argv: Optional[Sequence[str]] = None, stream: Optional[TextIO] = None) -> int:
    """Parse arguments, run the command, write the output; returns the process exit code."""
    stream = stream or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_VALIDATION
    try:
        config = ConfigManager(args.config).run_config
        if args.stream and args.command != 'spectrum':
            raise InvalidArgumentError("--stream applies to the spectrum command only")
        if args.export and args.command != 'simulate':
            raise InvalidArgumentError("--export applies to the simulate command only")
        if args.stream:
            stream_spectrum(config, args.threads, args.out or config.output.path or None, stream)
            return EXIT_OK
        report = run(args.command, config, threads=args.threads, seed=args.seed)
        emit(report, config, args.csv, args.out, stream)
        if args.export:
            write_operators(report.operators, args.export)
    except NumericError as e:
        logger.error(f"Numeric error in {args.command}: {str(e)}", exc_info=True)
        return EXIT_NUMERIC
    except LabError as e:
        logger.error(f"Invalid input for {args.command}: {str(e)}")
        return EXIT_VALIDATION
    except OSError as e:
        logger.error(f"I/O error in {args.command}: {str(e)}", exc_info=True)
        return EXIT_VALIDATION
    return EXIT_OK


def logging_options(argv: Sequence[str]) -> Tuple[str, Optional[str]]:
    """--log-level and --log-file, read ahead of the full parse so logging is ready first."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument('--log-level', default='INFO', choices=('DEBUG', 'INFO', 'WARNING', 'ERROR'))
    pre.add_argument('--log-file', default=None)
    known, _ = pre.parse_known_args(argv)
    return known.log_level, known.log_file
