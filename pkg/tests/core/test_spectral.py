import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import raises

from akcy import Grid4, ScalarField, TwoForm
from akcy.exc import ConfigError, NonPositiveDensity, NonZeroMean
from akcy.forms import OMEGA_0
from akcy.spectral import (
    derivative,
    fft_workers,
    flat_laplacian,
    integral,
    integrate,
    log_integral,
    partial_derivative,
    solve_flat_poisson,
    truncate_nyquist,
)


def central_difference_error(n, k=4 * np.pi):
    """Max error of the central difference of ``sin(k x2)`` on ``n`` points."""
    grid = Grid4((4, n, 4, 4))
    x2 = grid.coordinates[1]
    h = grid.spacing[1]
    values = np.sin(k * x2)
    spectral = derivative(values, grid, 1)
    central = (np.roll(values, -1, axis=1) - np.roll(values, 1, axis=1)) / (2 * h)
    return float(np.max(np.abs(spectral - central)))


class TestDerivatives:
    def setup_method(self, method):
        self.grid = Grid4((8, 8, 4, 4))
        self.x1, self.x2, _, _ = self.grid.coordinates

    def test_constant(self):
        f = ScalarField(self.grid, 3.5)
        assert partial_derivative(f, 2).max_abs() < 1e-12

    def test_sine(self):
        f = ScalarField(self.grid, np.sin(2 * np.pi * self.x1))
        df = partial_derivative(f, 1)
        assert np.max(np.abs(df.components - 2 * np.pi * np.cos(2 * np.pi * self.x1))) < 1e-12
        assert partial_derivative(f, 2).max_abs() < 1e-12

    def test_componentwise_on_forms(self):
        f = TwoForm(self.grid, np.sin(2 * np.pi * self.x2)[..., None, None] * OMEGA_0)
        df = partial_derivative(f, 2)
        assert isinstance(df, TwoForm)
        expected = 2 * np.pi * np.cos(2 * np.pi * self.x2)
        assert np.allclose(df.components[..., 0, 2], expected, atol=1e-12)

    def test_invalid_axis(self):
        with raises(ValueError):
            partial_derivative(ScalarField(self.grid, 0.0), 0)

    def test_second_order_difference_oracle(self):
        ratio = central_difference_error(16) / central_difference_error(32)
        assert 3.5 < ratio < 4.5

    @settings(max_examples=10, deadline=None)
    @given(
        st.integers(min_value=0, max_value=2**32 - 1),
        st.integers(min_value=0, max_value=3),
        st.integers(min_value=0, max_value=3),
    )
    def test_partial_derivatives_commute(self, seed, i, j):
        values = np.random.default_rng(seed).standard_normal(self.grid.shape)
        ij = derivative(derivative(values, self.grid, i), self.grid, j)
        ji = derivative(derivative(values, self.grid, j), self.grid, i)
        assert np.max(np.abs(ij - ji)) < 1e-9

    @settings(max_examples=10, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=0, max_value=3))
    def test_integration_by_parts(self, seed, axis):
        rng = np.random.default_rng(seed)
        f = truncate_nyquist(rng.standard_normal(self.grid.shape), self.grid)
        h = truncate_nyquist(rng.standard_normal(self.grid.shape), self.grid)
        left = integral(derivative(f, self.grid, axis) * h, self.grid)
        right = -integral(f * derivative(h, self.grid, axis), self.grid)
        assert abs(left - right) < 1e-10


class TestIntegration:
    def setup_method(self, method):
        self.grid = Grid4((8, 8, 4, 4))
        self.x1 = self.grid.coordinates[0]

    def test_volume_of_standard_form(self):
        assert np.isclose(integrate(ScalarField(self.grid, 1.0), TwoForm(self.grid, OMEGA_0)), 2.0)

    def test_sine_integrates_to_zero(self):
        f = ScalarField(self.grid, np.sin(2 * np.pi * self.x1))
        assert abs(integrate(f, ScalarField(self.grid, 1.0))) < 1e-14

    def test_non_positive_density(self):
        density = ScalarField(self.grid, np.sin(2 * np.pi * self.x1))
        with raises(NonPositiveDensity):
            integrate(ScalarField(self.grid, 1.0), density)

    def test_log_integral(self):
        log_values = np.full(self.grid.shape, 800.0)
        density = np.full(self.grid.shape, 2.0)
        assert np.isclose(log_integral(log_values, density, self.grid), 800.0 + np.log(2.0))


class TestPoisson:
    def setup_method(self, method):
        self.grid = Grid4((8, 8, 4, 4))
        self.x1, self.x2, _, _ = self.grid.coordinates

    def test_eigenfunction(self):
        u = np.sin(2 * np.pi * self.x1) * np.cos(4 * np.pi * self.x2)
        rhs = ScalarField(self.grid, -20 * np.pi**2 * u)
        assert np.max(np.abs(solve_flat_poisson(rhs).components - u)) < 1e-12

    def test_non_zero_mean(self):
        with raises(NonZeroMean):
            solve_flat_poisson(ScalarField(self.grid, 1.0 + np.sin(2 * np.pi * self.x1)))

    def test_round_trip(self):
        rng = np.random.default_rng(0)
        values = truncate_nyquist(rng.standard_normal(self.grid.shape), self.grid)
        values -= values.mean()
        u = solve_flat_poisson(ScalarField(self.grid, values))
        assert abs(u.mean()) < 1e-12
        assert np.max(np.abs(flat_laplacian(u).components - values)) < 1e-9


class TestWorkers:
    def test_default(self, monkeypatch):
        monkeypatch.delenv('AKCY_THREADS', raising=False)
        assert fft_workers() == 1

    def test_from_environment(self, monkeypatch):
        monkeypatch.setenv('AKCY_THREADS', '3')
        assert fft_workers() == 3

    def test_invalid(self, monkeypatch):
        for value in ('zero', '0', '-2'):
            monkeypatch.setenv('AKCY_THREADS', value)
            with raises(ConfigError):
                fft_workers()
