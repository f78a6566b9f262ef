"""
Fourier machinery on the periodic grid: differentiation, integration and
the flat Poisson inverse. Array-level helpers take and return plain numpy
arrays whose first four axes are the grid axes; the public operations wrap
them for :class:`~akcy.fields.TensorField` values.
"""

import logging
import os

import numpy as np
import scipy.fft
from scipy.special import logsumexp

from .exc import ConfigError, NonPositiveDensity, NonZeroMean
from .fields import ScalarField, TensorField, TwoForm

logger = logging.getLogger(__name__)

AXES = (0, 1, 2, 3)
MEAN_TOLERANCE = 1e-10


def fft_workers():
    """Worker count for every transform, capped by ``AKCY_THREADS``."""
    value = os.environ.get('AKCY_THREADS')
    if value is None or value == '':
        return 1
    try:
        workers = int(value)
    except ValueError:
        raise ConfigError(f'AKCY_THREADS must be a positive integer, got {value!r}')
    if workers < 1:
        raise ConfigError(f'AKCY_THREADS must be a positive integer, got {value!r}')
    return workers


def forward(a):
    return scipy.fft.fftn(a, axes=AXES, workers=fft_workers())


def backward(a_hat):
    return scipy.fft.ifftn(a_hat, axes=AXES, workers=fft_workers()).real


def _expand(symbol, ndim):
    return symbol.reshape(symbol.shape + (1,) * (ndim - 4))


def derivative(a, grid, axis):
    """Spectral derivative of an array along grid axis ``axis`` (0-based)."""
    wave = _expand(grid.derivative_wavenumbers[axis], np.ndim(a))
    return backward(1j * wave * forward(a))


def gradient(a, grid):
    """
    All four partial derivatives of ``a``. The derivative index is inserted
    as the first component axis, so ``result[..., m, I] = d_m a[..., I]``.
    """
    a_hat = forward(a)
    ndim = np.ndim(a)
    parts = [
        backward(1j * _expand(wave, ndim) * a_hat)
        for wave in grid.derivative_wavenumbers
    ]
    return np.stack(parts, axis=4)


def truncate_nyquist(a, grid):
    """Remove Fourier content on Nyquist modes."""
    a_hat = forward(a)
    a_hat[grid.nyquist_mask] = 0
    return backward(a_hat)


def flat_laplacian_array(a, grid):
    return backward(_expand(grid.laplacian_symbol, np.ndim(a)) * forward(a))


def poisson_array(rhs, grid):
    rhs_hat = forward(rhs)
    symbol = grid.laplacian_symbol.copy()
    symbol.reshape(-1)[0] = 1.0
    u_hat = rhs_hat / _expand(symbol, rhs_hat.ndim)
    u_hat[(0, 0, 0, 0)] = 0.0
    return backward(u_hat)


def partial_derivative(f, axis):
    """
    Spectral partial derivative of a tensor field, componentwise.

    :param f: the field
    :param axis: coordinate index in ``1..4``
    """
    if axis not in (1, 2, 3, 4):
        raise ValueError(f'axis must be one of 1..4, got {axis!r}')
    return f.replace(derivative(f.components, f.grid, axis - 1))


def density_of(vol):
    """Scalar density of a 4-form given as a density field or as a 2-form ``w`` (``w^w``)."""
    if isinstance(vol, TwoForm):
        from .forms import wedge

        return wedge(vol.components, vol.components)
    if isinstance(vol, TensorField):
        return vol.components
    return np.asarray(vol, dtype=float)


def integral(values, grid):
    return float(np.sum(values) * grid.cell_volume)


def log_integral(log_values, density, grid):
    """``log(integral e^log_values density)`` without overflow."""
    return float(logsumexp(log_values, b=density)) + float(np.log(grid.cell_volume))


def integrate(f, vol):
    """
    Integrate ``f`` against a 4-form density.

    :param f: scalar field (or array) to integrate
    :param vol: positive 4-form density, either a :class:`ScalarField` or a
        2-form whose square is used
    """
    grid = f.grid
    density = density_of(vol)
    if np.any(density <= 0):
        raise NonPositiveDensity(
            f'4-form density has minimum {float(np.min(density)):.3e}'
        )
    return integral(f.components * density, grid)


def solve_flat_poisson(rhs):
    """
    The zero-mean solution of ``Laplacian u = rhs`` for the flat metric.

    :param rhs: scalar field with zero mean
    """
    values = rhs.components
    mean = float(np.mean(values))
    scale = float(np.sqrt(np.mean(values**2)))
    if abs(mean) > MEAN_TOLERANCE * scale:
        raise NonZeroMean(f'right-hand side has mean {mean:.3e}')
    return ScalarField(rhs.grid, poisson_array(values, rhs.grid))


def flat_laplacian(f):
    return f.replace(flat_laplacian_array(f.components, f.grid))
