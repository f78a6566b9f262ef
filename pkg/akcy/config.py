"""
Run configuration.

A run is described by one TOML document::

    [grid]
    n = [16, 16, 4, 4]
    periods = [1.0, 1.0, 1.0, 1.0]

    [scenario]
    name = "perturbed"
    epsilon = 1e-3
    seed = 7
    bump_axes = [0, 1]

    [[forcing]]
    mode = [1, 1, 0, 0]
    amplitude = 0.1
    kind = "sin"

    [solver]
    newton_tol = 1e-10

    [checks]
    uniqueness = true

    [outputs]
    directory = "out"

Every table is optional; missing keys take the values of :data:`DEFAULTS`.
"""

import copy
import logging
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .exc import ConfigError, InvalidGrid
from .grid import Grid4
from .solver import SolverConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)

SCENARIOS = ('kahler', 'perturbed')
FORCING_KINDS = ('sin', 'cos')
LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR')

DEFAULTS = {
    'grid': {
        'n': [16, 16, 16, 16],
        'periods': [1.0, 1.0, 1.0, 1.0],
    },
    'scenario': {
        'name': 'kahler',
        'epsilon': 0.0,
        'seed': 0,
        'bump_axes': [0, 1, 2, 3],
    },
    'forcing': [],
    'solver': {f.name: f.default for f in fields(SolverConfig)},
    'checks': {
        'uniqueness': False,
        'uniqueness_seeds': [1, 2],
        'random_forms': 20,
    },
    'outputs': {
        'directory': 'akcy-out',
        'dump': False,
        'log_level': 'INFO',
        'ledger': True,
    },
}

_FORCING_DEFAULTS = {'mode': None, 'amplitude': None, 'kind': 'sin'}


@dataclass(frozen=True)
class GridSpec:
    n: tuple
    periods: tuple

    def grid(self):
        return Grid4(self.n, self.periods)


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    epsilon: float
    seed: int
    bump_axes: tuple


@dataclass(frozen=True)
class ForcingTerm:
    mode: tuple
    amplitude: float
    kind: str = 'sin'


@dataclass(frozen=True)
class CheckSpec:
    uniqueness: bool
    uniqueness_seeds: tuple
    random_forms: int


@dataclass(frozen=True)
class OutputSpec:
    directory: Path
    dump: bool
    log_level: str
    ledger: bool


@dataclass(frozen=True)
class RunConfig:
    grid: GridSpec
    scenario: ScenarioSpec
    forcing: tuple
    solver: SolverConfig
    checks: CheckSpec
    outputs: OutputSpec
    source: str = None

    def as_dict(self):
        result = asdict(self)
        result['outputs']['directory'] = str(self.outputs.directory)
        result['forcing'] = list(result['forcing'])
        result.pop('source')
        return result

    def with_epsilon(self, epsilon, directory=None):
        """Copy of the configuration for one point of an epsilon sweep."""
        outputs = self.outputs
        if directory is not None:
            outputs = replace(outputs, directory=Path(directory))
        return replace(
            self, scenario=replace(self.scenario, epsilon=float(epsilon)), outputs=outputs
        )


def _merge(defaults, document, table):
    if not isinstance(document, dict):
        raise ConfigError(f'[{table}] must be a table')
    unknown = set(document) - set(defaults)
    if unknown:
        raise ConfigError(f'unknown keys in [{table}]: {", ".join(sorted(unknown))}')
    merged = copy.deepcopy(defaults)
    merged.update(document)
    return merged


def _check_type(table, key, value, types):
    if isinstance(value, bool) and bool not in types:
        raise ConfigError(f'{table}.{key} has the wrong type {type(value).__name__}')
    if not isinstance(value, types):
        raise ConfigError(f'{table}.{key} has the wrong type {type(value).__name__}')
    return value


def _int_list(table, key, value, length=None):
    if not isinstance(value, (list, tuple)):
        raise ConfigError(f'{table}.{key} must be a list')
    for item in value:
        _check_type(table, key, item, (int,))
    if length is not None and len(value) != length:
        raise ConfigError(f'{table}.{key} must have {length} entries')
    return tuple(int(item) for item in value)


def _number(table, key, value):
    return float(_check_type(table, key, value, (int, float)))


def _grid_spec(raw):
    n = _int_list('grid', 'n', raw['n'], 4)
    if not isinstance(raw['periods'], (list, tuple)):
        raise ConfigError('grid.periods must be a list')
    periods = tuple(_number('grid', 'periods', p) for p in raw['periods'])
    spec = GridSpec(n, periods)
    try:
        spec.grid()
    except InvalidGrid as error:
        raise ConfigError(f'invalid [grid]: {error}')
    return spec


def _scenario_spec(raw):
    name = _check_type('scenario', 'name', raw['name'], (str,))
    if name not in SCENARIOS:
        raise ConfigError(f'scenario.name must be one of {SCENARIOS}, got {name!r}')
    epsilon = _number('scenario', 'epsilon', raw['epsilon'])
    if epsilon < 0:
        raise ConfigError('scenario.epsilon must not be negative')
    axes = _int_list('scenario', 'bump_axes', raw['bump_axes'])
    if not axes or any(axis not in range(4) for axis in axes) or len(set(axes)) != len(axes):
        raise ConfigError(f'scenario.bump_axes must be distinct axes in 0..3, got {list(axes)}')
    return ScenarioSpec(
        name=name,
        epsilon=epsilon,
        seed=_check_type('scenario', 'seed', raw['seed'], (int,)),
        bump_axes=axes,
    )


def _forcing_terms(raw, grid):
    if not isinstance(raw, (list, tuple)):
        raise ConfigError('[[forcing]] must be an array of tables')
    terms = []
    for index, document in enumerate(raw):
        table = f'forcing[{index}]'
        entry = _merge(_FORCING_DEFAULTS, document, table)
        if entry['mode'] is None or entry['amplitude'] is None:
            raise ConfigError(f'{table} needs both mode and amplitude')
        mode = _int_list(table, 'mode', entry['mode'], 4)
        if not grid.resolves(mode):
            raise ConfigError(
                f'{table}.mode {list(mode)} is not strictly below Nyquist for n = {list(grid.n)}'
            )
        kind = _check_type(table, 'kind', entry['kind'], (str,))
        if kind not in FORCING_KINDS:
            raise ConfigError(f'{table}.kind must be one of {FORCING_KINDS}, got {kind!r}')
        terms.append(ForcingTerm(mode, _number(table, 'amplitude', entry['amplitude']), kind))
    return tuple(terms)


def _solver_config(raw):
    values = dict(raw)
    for f in fields(SolverConfig):
        value = values[f.name]
        if f.name == 't_steps':
            if value != 'adaptive':
                _check_type('solver', f.name, value, (int,))
        elif isinstance(f.default, str):
            _check_type('solver', f.name, value, (str,))
        elif isinstance(f.default, int):
            _check_type('solver', f.name, value, (int,))
        else:
            values[f.name] = _number('solver', f.name, value)
    return SolverConfig(**values)


def _check_spec(raw):
    seeds = _int_list('checks', 'uniqueness_seeds', raw['uniqueness_seeds'], 2)
    count = _check_type('checks', 'random_forms', raw['random_forms'], (int,))
    if count < 1:
        raise ConfigError('checks.random_forms must be at least 1')
    return CheckSpec(
        uniqueness=_check_type('checks', 'uniqueness', raw['uniqueness'], (bool,)),
        uniqueness_seeds=seeds,
        random_forms=count,
    )


def _output_spec(raw, base):
    directory = Path(_check_type('outputs', 'directory', raw['directory'], (str,)))
    if not directory.is_absolute() and base is not None:
        directory = base / directory
    level = _check_type('outputs', 'log_level', raw['log_level'], (str,)).upper()
    if level not in LOG_LEVELS:
        raise ConfigError(f'outputs.log_level must be one of {LOG_LEVELS}, got {level!r}')
    return OutputSpec(
        directory=directory,
        dump=_check_type('outputs', 'dump', raw['dump'], (bool,)),
        log_level=level,
        ledger=_check_type('outputs', 'ledger', raw['ledger'], (bool,)),
    )


def parse_config(document, base=None, source=None):
    """
    Merge ``document`` into :data:`DEFAULTS` and build a :class:`RunConfig`.

    :param document: parsed TOML as a dict
    :param base: directory that relative output paths are resolved against
    :raises ConfigError: on unknown tables or keys, wrong types or values
        out of range
    """
    if not isinstance(document, dict):
        raise ConfigError('configuration must be a table')
    unknown = set(document) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f'unknown tables: {", ".join(sorted(unknown))}')
    merged = {
        table: (
            document.get(table, [])
            if table == 'forcing'
            else _merge(defaults, document.get(table, {}), table)
        )
        for table, defaults in DEFAULTS.items()
    }
    grid_spec = _grid_spec(merged['grid'])
    return RunConfig(
        grid=grid_spec,
        scenario=_scenario_spec(merged['scenario']),
        forcing=_forcing_terms(merged['forcing'], grid_spec.grid()),
        solver=_solver_config(merged['solver']),
        checks=_check_spec(merged['checks']),
        outputs=_output_spec(merged['outputs'], base),
        source=source,
    )


def load_config(path):
    """Read and validate the TOML configuration at ``path``."""
    path = Path(path)
    try:
        with path.open('rb') as stream:
            document = tomllib.load(stream)
    except OSError as error:
        raise ConfigError(f'cannot read configuration {path}: {error.strerror}')
    except tomllib.TOMLDecodeError as error:
        raise ConfigError(f'invalid TOML in {path}: {error}')
    config = parse_config(document, base=path.parent, source=str(path))
    logger.debug('loaded configuration from %s', path)
    return config
