import configparser
import json
import logging
import os
from dataclasses import asdict, dataclass, field

from equilibria import CRITICAL

log = logging.getLogger(__name__)

CONFIG_FILE = os.environ.get('PAINLEVE_CONFIG',
                             os.path.join(os.path.dirname(os.path.abspath(__file__)), 'config.ini'))
DEFAULT_REGIMES = ('outer', 'inner1', 'inner2', 'elliptic', 'kuzmak')


def load_config(path=None):
    """Loads configuration from an INI file (config.ini next to this module by default)."""
    path = path or CONFIG_FILE
    parser = configparser.ConfigParser()
    if not os.path.exists(path):
        log.error(f"Configuration file '{path}' not found.")
        raise FileNotFoundError(f"Configuration file '{path}' not found.")

    try:
        parser.read(path, encoding='utf-8')
        log.info(f"Configuration loaded successfully from '{path}'.")
        # csv_digits drives the export format, keep it sane
        try:
            digits = parser.getint('General', 'csv_digits')
            if not 1 <= digits <= 17:
                raise ValueError(digits)
        except (configparser.NoSectionError, configparser.NoOptionError, ValueError):
            log.warning("csv_digits missing or invalid in config. Setting default: 17.")
            if not parser.has_section('General'):
                parser.add_section('General')
            parser.set('General', 'csv_digits', '17')
        return parser
    except configparser.Error as e:
        log.error(f"Error parsing configuration file '{path}': {e}")
        raise


try:
    config = load_config()
except Exception as e:
    log.critical(f"Failed to load configuration. Falling back to built-in defaults. Error: {e}")
    config = None


def use_config(path):
    """Replaces the module-level config, e.g. for the --config flag."""
    global config
    config = load_config(path)
    return config


def get_general_setting(key, fallback=None):
    if not config:
        return fallback
    try:
        return config.get('General', key)
    except (configparser.NoSectionError, configparser.NoOptionError):
        log.warning(f"Setting '[General]/{key}' not found in config. Returning fallback: {fallback}")
        return fallback


def get_int_setting(section, key, fallback=0):
    if not config:
        return fallback
    try:
        return config.getint(section, key)
    except (configparser.NoSectionError, configparser.NoOptionError, ValueError):
        log.warning(f"Integer setting '[{section}]/{key}' not found or invalid. Returning fallback: {fallback}")
        return fallback


def get_float_setting(section, key, fallback=0.0):
    if not config:
        return fallback
    try:
        return config.getfloat(section, key)
    except (configparser.NoSectionError, configparser.NoOptionError, ValueError):
        log.warning(f"Float setting '[{section}]/{key}' not found or invalid. Returning fallback: {fallback}")
        return fallback


def get_optional_float(section, key):
    """Float setting that may be legitimately absent (no warning)."""
    if not config or not config.has_option(section, key):
        return None
    try:
        return config.getfloat(section, key)
    except ValueError:
        log.warning(f"Float setting '[{section}]/{key}' is not a number. Ignoring it.")
        return None


def get_enabled_regimes():
    """Gets the list of enabled regime plugins."""
    if not config:
        return list(DEFAULT_REGIMES)
    try:
        raw = config.get('Regimes', 'enabled_regimes')
        regimes = [r.strip() for r in raw.splitlines() if r.strip() and not r.strip().startswith(';')]
        log.debug(f"Enabled regimes: {regimes}")
        return regimes
    except (configparser.NoSectionError, configparser.NoOptionError):
        log.warning("'[Regimes]/enabled_regimes' not found. Enabling every regime.")
        return list(DEFAULT_REGIMES)


@dataclass
class RunConfig:
    """Every knob of a run: margins, tolerances, P1 integration and output paths."""
    eps: float = 1e-3
    t_range: tuple = None
    m_outer: float = 5.0
    m_pole: float = 5.0
    m_kuz: float = 5.0
    m_inner2: float = 5.0
    a_default: float = 1.0
    tau_far: float = 0.2
    oracle_tol: float = 1e-10
    p1_tol: float = 1e-11
    fit_threshold: float = 1e-6
    quad_tol: float = 1e-13
    newton_max_iter: int = 8
    tau0: float = -30.0
    tau1: float = None
    n_poles: int = 8
    v_max: float = 1e6
    fit_v_min: float = 10.0
    fit_x_max: float = 0.45
    w_pole_scale: float = 0.125
    phase_a: float = 0.0
    output_dir: str = 'output'
    database_file: str = 'results.db'
    default_format: str = 'csv'
    csv_digits: int = 17
    regimes: tuple = field(default=DEFAULT_REGIMES)

    def __post_init__(self):
        if self.t_range is None:
            self.t_range = (CRITICAL.t_star - self.a_default, CRITICAL.t_star + self.a_default)

    def validate(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        tols = {'oracle_tol': self.oracle_tol, 'p1_tol': self.p1_tol,
                'fit_threshold': self.fit_threshold, 'quad_tol': self.quad_tol}
        for name, value in tols.items():
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")
        for name in ('m_outer', 'm_pole', 'm_kuz', 'm_inner2'):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.t_range[0] >= self.t_range[1]:
            raise ValueError(f"empty t range {self.t_range}")
        return self

    def to_json(self):
        return json.dumps(asdict(self), indent=4, default=str)


def build_run_config(**overrides):
    """RunConfig from config.ini with CLI overrides (None values are ignored)."""
    rc = RunConfig(
        m_outer=get_float_setting('Margins', 'm_outer', 5.0),
        m_pole=get_float_setting('Margins', 'm_pole', 5.0),
        m_kuz=get_float_setting('Margins', 'm_kuz', 5.0),
        m_inner2=get_float_setting('Margins', 'm_inner2', 5.0),
        a_default=get_float_setting('Margins', 'a_default', 1.0),
        tau_far=get_float_setting('Margins', 'tau_far', 0.2),
        oracle_tol=get_float_setting('Tolerances', 'oracle_tol', 1e-10),
        p1_tol=get_float_setting('Tolerances', 'p1_tol', 1e-11),
        fit_threshold=get_float_setting('Tolerances', 'fit_threshold', 1e-6),
        quad_tol=get_float_setting('Tolerances', 'quad_tol', 1e-13),
        newton_max_iter=get_int_setting('Tolerances', 'newton_max_iter', 8),
        tau0=get_float_setting('P1Layer', 'tau0', -30.0),
        tau1=get_optional_float('P1Layer', 'tau1'),
        n_poles=get_int_setting('P1Layer', 'n_poles', 8),
        v_max=get_float_setting('P1Layer', 'v_max', 1e6),
        fit_v_min=get_float_setting('P1Layer', 'fit_v_min', 10.0),
        fit_x_max=get_float_setting('P1Layer', 'fit_x_max', 0.45),
        w_pole_scale=get_float_setting('P1Layer', 'w_pole_scale', 0.125),
        phase_a=get_float_setting('Phase', 'a', 0.0),
        output_dir=get_general_setting('output_dir', 'output'),
        database_file=get_general_setting('database_file', 'results.db'),
        csv_digits=get_int_setting('General', 'csv_digits', 17),
        default_format=config.get('Output', 'default_format', fallback='csv') if config else 'csv',
        regimes=tuple(get_enabled_regimes()),
    )
    for key, value in overrides.items():
        if value is None:
            continue
        if not hasattr(rc, key):
            raise ValueError(f"unknown run setting '{key}'")
        setattr(rc, key, value)
    return rc.validate()
