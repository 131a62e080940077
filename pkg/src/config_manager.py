import configparser
import logging
import math
import os
import re
from dataclasses import dataclass, fields
from typing import Any, Callable, Dict, Optional, Tuple

from src.errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_FILE = "config/lab.ini"

DEFAULT_CONFIG_TEXT = """\
[potential]
kind = square_well
depth = 2.0
radius = 1.0

[system]
n_particles = 100
"""


def _parse_bool(raw: str) -> bool:
    value = raw.strip().lower()
    if value in ('true', 'yes', 'on', '1'):
        return True
    if value in ('false', 'no', 'off', '0'):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def _parse_optional_int(raw: str) -> Optional[int]:
    return None if raw.strip() == '' else int(raw)


def _parse_modes(raw: str) -> Tuple[Tuple[int, int, int], ...]:
    modes = []
    for chunk in raw.split(';'):
        if not chunk.strip():
            continue
        parts = [int(x) for x in chunk.split(',')]
        if len(parts) != 3:
            raise ValueError(f"mode {chunk.strip()!r} needs three integer components")
        modes.append(tuple(parts))
    return tuple(modes)


def _parse_names(raw: str) -> Tuple[str, ...]:
    return tuple(x.strip() for x in raw.split(',') if x.strip())


def _format(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return '; '.join(','.join(str(c) for c in mode) for mode in value)
        return ', '.join(value)
    return str(value)


@dataclass(frozen=True)
class _Field:
    parse: Callable[[str], Any]
    choices: Optional[Tuple[str, ...]] = None
    required: bool = False
    positive: bool = False


@dataclass(frozen=True)
class PotentialConfig:
    kind: str
    depth: float = 0.0
    radius: float = 1.0
    scale: float = 1.0
    grid_file: str = ''
    support_radius: float = 0.0


@dataclass(frozen=True)
class SystemConfig:
    n_particles: int
    scattering_length_source: str = 'scattering'
    scattering_length: float = 0.0
    r_max: float = 0.0
    tolerance: float = 1e-10


@dataclass(frozen=True)
class LatticeConfig:
    n_max: int = 400
    e_lambda_m_max: int = 200
    e_lambda_scheme: str = 'cube_cutoff_average'
    born_box_scale: float = 1.0
    born_tolerance: float = 1e-6


@dataclass(frozen=True)
class SpectrumConfig:
    zeta: float = 200.0
    dispersion: str = 'gross_pitaevskii'
    include_boundary: bool = True
    n_max: Optional[int] = None


@dataclass(frozen=True)
class FockConfig:
    # ±e1, ±e2 form the low set; ±(1,1,0) is the high shell the cubic generators need
    modes: Tuple[Tuple[int, int, int], ...] = ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0),
                                               (1, 1, 0), (-1, -1, 0))
    n_particles: int = 3
    b_prefactor: str = 'sqrt'
    generators: Tuple[str, ...] = ('B_eta', 'cubic_A', 'cubic_Atilde', 'B_tau')
    high_min_norm: Optional[int] = 2
    low_max_norm: Optional[int] = 1
    pairing_min_norm: Optional[int] = None
    localization_m: float = 2.0
    random_states: int = 3
    conjugation: str = 'exact_expm'
    bch_order: int = 8
    eigenvalues: int = 10


@dataclass(frozen=True)
class OutputConfig:
    format: str = 'json'
    path: str = ''


SECTIONS = {
    'potential': (PotentialConfig, {
        'kind': _Field(str, choices=('square_well', 'tabulated'), required=True),
        'depth': _Field(float),
        'radius': _Field(float, positive=True),
        'scale': _Field(float),
        'grid_file': _Field(str),
        'support_radius': _Field(float),
    }),
    'system': (SystemConfig, {
        'n_particles': _Field(int, required=True, positive=True),
        'scattering_length_source': _Field(str, choices=('scattering', 'born', 'value')),
        'scattering_length': _Field(float),
        'r_max': _Field(float),
        'tolerance': _Field(float, positive=True),
    }),
    'lattice': (LatticeConfig, {
        'n_max': _Field(int, positive=True),
        'e_lambda_m_max': _Field(int, positive=True),
        'e_lambda_scheme': _Field(str, choices=('cube_cutoff_average', 'richardson')),
        'born_box_scale': _Field(float, positive=True),
        'born_tolerance': _Field(float, positive=True),
    }),
    'spectrum': (SpectrumConfig, {
        'zeta': _Field(float, positive=True),
        'dispersion': _Field(str, choices=('free', 'gross_pitaevskii', 'mean_field')),
        'include_boundary': _Field(_parse_bool),
        'n_max': _Field(_parse_optional_int, positive=True),
    }),
    'fock': (FockConfig, {
        'modes': _Field(_parse_modes),
        'n_particles': _Field(int, positive=True),
        'b_prefactor': _Field(str, choices=('sqrt', 'strict')),
        'generators': _Field(_parse_names),
        'high_min_norm': _Field(_parse_optional_int, positive=True),
        'low_max_norm': _Field(_parse_optional_int),
        'pairing_min_norm': _Field(_parse_optional_int, positive=True),
        'localization_m': _Field(float, positive=True),
        'random_states': _Field(int),
        'conjugation': _Field(str, choices=('exact_expm', 'truncated_BCH')),
        'bch_order': _Field(int, positive=True),
        'eigenvalues': _Field(int, positive=True),
    }),
    'output': (OutputConfig, {
        'format': _Field(str, choices=('json', 'csv')),
        'path': _Field(str),
    }),
}


@dataclass(frozen=True)
class RunConfig:
    potential: PotentialConfig
    system: SystemConfig
    lattice: LatticeConfig = LatticeConfig()
    spectrum: SpectrumConfig = SpectrumConfig()
    fock: FockConfig = FockConfig()
    output: OutputConfig = OutputConfig()

    def to_dict(self) -> Dict[str, Dict[str, Any]]:
        out = {}
        for name in SECTIONS:
            section = getattr(self, name)
            out[name] = {f.name: getattr(section, f.name) for f in fields(section)}
        return out

    def to_text(self) -> str:
        """Effective configuration with every key spelled out."""
        return _render(self.to_dict())


def _render(data: Dict[str, Dict[str, Any]]) -> str:
    lines = []
    for name, values in data.items():
        lines.append(f"[{name}]")
        lines.extend(f"{key} = {_format(value)}" for key, value in values.items())
        lines.append('')
    return '\n'.join(lines)


_SECTION_RE = re.compile(r'^\s*\[([^\]]+)\]')
_KEY_RE = re.compile(r'^([^\s#;=:\[][^=:]*?)\s*[=:]')


def _line_numbers(text: str) -> Tuple[Dict[str, int], Dict[Tuple[str, str], int]]:
    """1-based lines of section headers and of keys, scanned from the raw text."""
    sections: Dict[str, int] = {}
    keys: Dict[Tuple[str, str], int] = {}
    current = None
    for number, line in enumerate(text.splitlines(), start=1):
        header = _SECTION_RE.match(line)
        if header:
            current = header.group(1).strip()
            sections.setdefault(current, number)
            continue
        key = _KEY_RE.match(line)
        if key and current is not None:
            keys.setdefault((current, key.group(1).strip()), number)
    return sections, keys


def _error_line(error: configparser.Error) -> Optional[int]:
    if getattr(error, 'lineno', None) is not None:
        return error.lineno
    errors = getattr(error, 'errors', None)
    if errors:
        return errors[0][0]
    return None


def parse_config(text: str) -> RunConfig:
    """
    Parse and validate sectioned configuration text.

    Args:
        text: INI text with [potential], [system], [lattice], [spectrum], [fock], [output]

    Returns:
        RunConfig with defaults applied to every key that is not given
    """
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=('#',))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigError(str(e).splitlines()[0], line=_error_line(e)) from e
    section_lines, key_lines = _line_numbers(text)

    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]", line=section_lines.get(section))
    built = {}
    for section, (cls, schema) in SECTIONS.items():
        given = parser[section] if parser.has_section(section) else {}
        values = {}
        for key, raw in given.items():
            line = key_lines.get((section, key))
            if key not in schema:
                raise ConfigError(f"unknown key {section}.{key}", line=line)
            spec = schema[key]
            try:
                value = spec.parse(raw)
            except ValueError as e:
                raise ConfigError(f"{section}.{key}: {e}", line=line) from e
            if spec.choices and value not in spec.choices:
                raise ConfigError(f"{section}.{key} must be one of {', '.join(spec.choices)}, got {raw!r}",
                                  line=line)
            if spec.positive and value is not None and not (isinstance(value, (int, float)) and value > 0):
                raise ConfigError(f"{section}.{key} must be positive, got {raw!r}", line=line)
            if isinstance(value, float) and not math.isfinite(value):
                raise ConfigError(f"{section}.{key} must be finite, got {raw!r}", line=line)
            values[key] = value
        for key, spec in schema.items():
            if spec.required and key not in values:
                raise ConfigError(f"missing required field {section}.{key}", line=section_lines.get(section))
        built[section] = cls(**values)
    return RunConfig(**built)


class ConfigManager:
    def __init__(self, config_file: Optional[str] = None):
        self.config_file = config_file
        self.run_config: Optional[RunConfig] = None
        self.load_config()

    def load_config(self) -> None:
        """Load configuration from file, create the default one if it does not exist"""
        if self.config_file is None:
            logger.info("No config file given, using built-in defaults")
            self.run_config = parse_config(DEFAULT_CONFIG_TEXT)
            return
        if not os.path.exists(self.config_file):
            logger.info(f"Config file {self.config_file} not found, creating default config")
            self.create_default_config()
            return
        logger.info(f"Loading config from {self.config_file}")
        with open(self.config_file, 'r', encoding='utf-8') as f:
            self.run_config = parse_config(f.read())

    def create_default_config(self) -> None:
        """Create default configuration file"""
        self.run_config = parse_config(DEFAULT_CONFIG_TEXT)
        self.save_config()

    def save_config(self) -> None:
        """Save the effective configuration to file"""
        if self.config_file is None:
            return
        directory = os.path.dirname(self.config_file)
        if directory:
            os.makedirs(directory, exist_ok=True)
        try:
            logger.info(f"Saving config to {self.config_file}")
            with open(self.config_file, 'w', encoding='utf-8') as f:
                f.write(self.run_config.to_text())
        except OSError as e:
            logger.error(f"Error saving config: {str(e)}", exc_info=True)
            raise

    def get_setting(self, section: str, key: str) -> Any:
        """Get a typed setting value"""
        if section not in SECTIONS or key not in SECTIONS[section][1]:
            raise ConfigError(f"unknown key {section}.{key}")
        return getattr(getattr(self.run_config, section), key)

    def set_setting(self, section: str, key: str, value: Any) -> None:
        """Set a setting value; the whole configuration is re-validated"""
        data = self.run_config.to_dict()
        if section not in data or key not in data[section]:
            raise ConfigError(f"unknown key {section}.{key}")
        data[section][key] = value
        self.run_config = parse_config(_render(data))
        self.save_config()
