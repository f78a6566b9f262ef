import shutil
import tempfile
from pathlib import Path

import numpy as np

from akcy import continuation_manager, parse_config
from akcy.scenario import build_scenario
from akcy.spectral import truncate_nyquist


def sine_forcing(amplitude=0.1):
    return [{'mode': [1, 1, 0, 0], 'amplitude': amplitude, 'kind': 'sin'}]


class TestCase:
    """
    Builds the configured scenario before every test. Scenario data varies
    along the first two axes only, so the last two axes can stay coarse.
    """

    n = (8, 8, 4, 4)
    scenario = 'kahler'
    epsilon = 0.0
    bump_axes = (0, 1)
    seed = 3
    forcing = ()
    solver = {}
    checks = {}

    @property
    def options(self):
        return {
            'grid': {'n': list(self.n)},
            'scenario': {
                'name': self.scenario,
                'epsilon': self.epsilon,
                'seed': self.seed,
                'bump_axes': list(self.bump_axes),
            },
            'forcing': list(self.forcing),
            'solver': dict(self.solver),
            'checks': dict(self.checks),
            'outputs': {'directory': str(self.directory), 'log_level': 'DEBUG'},
        }

    def setup_method(self, method):
        self.directory = Path(tempfile.mkdtemp(prefix='akcy-test-'))
        self.config = parse_config(self.options)
        self.grid = self.config.grid.grid()
        self.triple, self.F = build_scenario(self.config)
        self.rng = np.random.default_rng(self.seed)

    def teardown_method(self, method):
        continuation_manager.reset()
        shutil.rmtree(self.directory, ignore_errors=True)

    def band_limited(self, *component_shape, amplitude=1.0):
        values = self.rng.standard_normal(self.grid.shape + component_shape)
        return amplitude * truncate_nyquist(values, self.grid)


class PerturbedTestCase(TestCase):
    scenario = 'perturbed'
    epsilon = 1e-2
