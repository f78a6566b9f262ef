import json
from pathlib import Path

from pytest import mark, raises

from akcy import load_config, parse_config
from akcy.config import DEFAULTS
from akcy.exc import ConfigError
from tests import TestCase, sine_forcing


class TestParseConfig:
    def test_defaults(self):
        config = parse_config({})
        assert config.grid.n == (16, 16, 16, 16)
        assert config.grid.periods == (1.0, 1.0, 1.0, 1.0)
        assert config.scenario.name == 'kahler'
        assert config.forcing == ()
        assert config.solver.t_steps == 'adaptive'
        assert config.checks.uniqueness is False
        assert config.outputs.directory == Path('akcy-out')
        assert config.outputs.ledger is True

    def test_defaults_cover_solver_fields(self):
        assert DEFAULTS['solver']['newton_tol'] == 1e-10
        assert DEFAULTS['solver']['class_mode'] == 'drifting'

    def test_forcing_terms(self):
        config = parse_config(
            {'grid': {'n': [8, 8, 4, 4]}, 'forcing': [{'mode': [3, -1, 1, 0], 'amplitude': 0.2}]}
        )
        (term,) = config.forcing
        assert term.mode == (3, -1, 1, 0)
        assert term.amplitude == 0.2
        assert term.kind == 'sin'

    def test_log_level_is_case_insensitive(self):
        assert parse_config({'outputs': {'log_level': 'debug'}}).outputs.log_level == 'DEBUG'

    def test_relative_directory(self, tmp_path):
        config = parse_config({'outputs': {'directory': 'out'}}, base=tmp_path)
        assert config.outputs.directory == tmp_path / 'out'

    def test_solver_options(self):
        config = parse_config({'solver': {'t_steps': 4, 'p': 6, 'class_mode': 'fixed'}})
        assert config.solver.t_steps == 4
        assert config.solver.p == 6.0
        assert config.solver.class_mode == 'fixed'

    @mark.parametrize(
        'document',
        [
            [],
            {'mesh': {}},
            {'grid': {'size': 8}},
            {'grid': {'n': [8, 8, 4]}},
            {'grid': {'n': [8, 8, 4, 5]}},
            {'grid': {'n': 'x'}},
            {'grid': {'periods': [1, 1, 1, 0]}},
            {'scenario': {'name': 'hyperbolic'}},
            {'scenario': {'epsilon': -1e-3}},
            {'scenario': {'seed': True}},
            {'scenario': {'bump_axes': [0, 0]}},
            {'scenario': {'bump_axes': [4]}},
            {'forcing': {'mode': [1, 0, 0, 0], 'amplitude': 1.0}},
            {'forcing': [{'mode': [1, 0, 0, 0]}]},
            {'forcing': [{'mode': [8, 0, 0, 0], 'amplitude': 1.0}]},
            {'forcing': [{'mode': [1, 0, 0, 0], 'amplitude': 1.0, 'kind': 'tan'}]},
            {'forcing': [{'mode': [1, 0, 0, 0], 'amplitude': 1.0, 'phase': 0.5}]},
            {'solver': {'t_steps': 'x'}},
            {'solver': {'p': 2}},
            {'solver': {'newton_tol': '1e-10'}},
            {'solver': {'newton_max_iter': 2.5}},
            {'checks': {'random_forms': 0}},
            {'checks': {'uniqueness_seeds': [1]}},
            {'outputs': {'log_level': 'TRACE'}},
            {'outputs': {'dump': 'yes'}},
        ],
    )
    def test_invalid(self, document):
        with raises(ConfigError):
            parse_config(document)


class TestForcedRunConfig(TestCase):
    forcing = sine_forcing(0.2) + [{'mode': [0, 1, 0, 0], 'amplitude': 0.1, 'kind': 'cos'}]

    def test_as_dict_can_be_parsed_again(self):
        document = self.config.as_dict()
        assert isinstance(document['forcing'], list)
        assert parse_config(document) == self.config

    def test_reparses_through_json(self):
        document = json.loads(json.dumps(self.config.as_dict()))
        config = parse_config(document)
        assert config == self.config
        assert [term.kind for term in config.forcing] == ['sin', 'cos']


class TestRunConfig(TestCase):
    def test_as_dict_can_be_parsed_again(self):
        assert parse_config(self.config.as_dict()) == self.config

    def test_as_dict_lists_forcing_terms(self):
        assert self.config.as_dict()['forcing'] == []

    def test_with_epsilon(self):
        point = self.config.with_epsilon(0.02, self.directory / 'eps_00')
        assert point.scenario.epsilon == 0.02
        assert point.outputs.directory == self.directory / 'eps_00'
        assert point.grid == self.config.grid
        assert self.config.scenario.epsilon == 0.0


class TestLoadConfig:
    def test_valid_file(self, tmp_path):
        path = tmp_path / 'run.toml'
        path.write_text(
            '[grid]\n'
            'n = [8, 8, 4, 4]\n'
            '\n'
            '[[forcing]]\n'
            'mode = [1, 1, 0, 0]\n'
            'amplitude = 0.1\n'
            '\n'
            '[outputs]\n'
            'directory = "out"\n'
        )
        config = load_config(path)
        assert config.grid.n == (8, 8, 4, 4)
        assert len(config.forcing) == 1
        assert config.outputs.directory == tmp_path / 'out'
        assert config.source == str(path)

    def test_invalid_toml(self, tmp_path):
        path = tmp_path / 'run.toml'
        path.write_text('[grid\nn = 8\n')
        with raises(ConfigError):
            load_config(path)

    def test_missing_file(self, tmp_path):
        with raises(ConfigError):
            load_config(tmp_path / 'missing.toml')
