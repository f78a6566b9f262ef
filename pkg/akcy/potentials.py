"""
Laplacians of almost-Kähler forms, the potentials ``phi_s`` and the
decomposition ``w' = w + sum s_i chi_i - (1/2) d(J d phi_s) + d a_s``.

The interpolating form is ``W_s = (1 - s) w + s w'``. The potential solves::

    (1 - 2s) w^w' + s w'^w' - (1 - s) w^w = (1/4) Laplacian_s(phi_s) W_s^2

In ``'fixed'`` mode the left-hand side must integrate to zero (``w'`` lies in
the class of ``w`` and has the same volume). In ``'drifting'`` mode its
average against ``W_s^2`` is removed first, which is the normalization used
when the class of ``w'`` moves along the harmonic self-dual forms.
"""

import logging
import math
from typing import NamedTuple

import numpy as np

from . import spectral
from .exc import InconsistentRHS, NotTaming
from .fields import OneForm, ScalarField, TwoForm
from .forms import (
    FLAT_SELF_DUAL,
    codifferential_array,
    exterior_derivative,
    frame_coordinates,
    self_dual_array,
    wedge,
)
from .harmonic import class_representatives
from .krylov import DEFAULT_TOLERANCE, FormSystem, ScalarSystem
from .structure import apply_j, metric_array

logger = logging.getLogger(__name__)

CONSISTENCY_TOLERANCE = 1e-8
MODES = ('fixed', 'drifting')


def _components(value):
    return getattr(value, 'components', value)


def laplacian_array(omega, J, phi, grid):
    """``-2 W ^ d(J d phi) / W^2`` for a closed ``J``-compatible ``W``."""
    ddc = exterior_derivative(apply_j(J, spectral.gradient(phi, grid)), grid)
    return -2 * wedge(omega, ddc) / wedge(omega, omega)


def laplacian(g, omega, phi, form='identity'):
    """
    Laplacian of ``phi`` for the almost-Kähler pair ``(omega, g)``.

    :param g: the metric of the pair
    :param omega: the symplectic form of the pair
    :param phi: :class:`~akcy.fields.ScalarField`
    :param form: ``'identity'`` evaluates the 4-form identity
        ``-W ^ d(J d phi) = (1/2) Laplacian(phi) W^2``; ``'metric'``
        evaluates ``-d* d phi``
    """
    grid = phi.grid
    if form == 'identity':
        J = _components(omega) @ np.linalg.inv(_components(g))
        values = laplacian_array(_components(omega), J, phi.components, grid)
    elif form == 'metric':
        dphi = spectral.gradient(phi.components, grid)
        values = -codifferential_array(dphi, _components(g), grid)
    else:
        raise ValueError(f"form must be 'identity' or 'metric', got {form!r}")
    return ScalarField(grid, values)


def interpolate(omega, omega_prime, s):
    return (1 - s) * omega + s * omega_prime


def potential_source(omega, omega_prime, s):
    """Density of ``(1 - 2s) w^w' + s w'^w' - (1 - s) w^w``."""
    return (
        (1 - 2 * s) * wedge(omega, omega_prime)
        + s * wedge(omega_prime, omega_prime)
        - (1 - s) * wedge(omega, omega)
    )


def potentials(omega, omega_prime, J, s, mode='fixed', tol=DEFAULT_TOLERANCE):
    """
    The zero-mean almost-Kähler potential ``phi_s``.

    :param omega: background :class:`~akcy.fields.TwoForm`
    :param omega_prime: second ``J``-compatible symplectic form
    :param J: the common :class:`~akcy.fields.ACStructure`
    :param s: interpolation parameter in ``[0, 1]``
    :param mode: ``'fixed'`` or ``'drifting'`` class normalization
    :param tol: relative tolerance of the Krylov solve
    """
    if mode not in MODES:
        raise ValueError(f'mode must be one of {MODES}, got {mode!r}')
    if not 0 <= s <= 1:
        raise ValueError(f's must lie in [0, 1], got {s!r}')
    grid = omega.grid
    w = omega.components
    wp = omega_prime.components
    j = J.components
    omega_s = interpolate(w, wp, s)
    volume = wedge(omega_s, omega_s)
    if np.any(volume <= 0):
        raise NotTaming(f'interpolating form at s={s} is not positive')
    source = potential_source(w, wp, s)
    total = spectral.integral(source, grid)
    scale = spectral.integral(volume, grid)
    if mode == 'drifting':
        source = source - (total / scale) * volume
    elif abs(total) > CONSISTENCY_TOLERANCE * scale:
        raise InconsistentRHS(
            f'potential source integrates to {total:.3e}; '
            'the forms are not cohomologous with equal volume'
        )
    rhs = 4 * source / volume
    if not np.any(rhs):
        return ScalarField(grid, np.zeros(grid.shape))
    system = ScalarSystem(
        grid,
        lambda u: laplacian_array(omega_s, j, u, grid),
        tol=tol,
        label=f'potential s={s:g}',
    )
    phi = system.solve(rhs)
    return ScalarField(grid, phi - np.mean(phi))


def nijenhuis_source(J, phi):
    """
    ``(1/4)(d_i J_j^k - d_j J_i^k) d_k phi dx^i ^ dx^j``, the right-hand side
    of the self-dual equation for ``a_s``. Vanishes for constant ``J``.
    """
    grid = phi.grid
    dJ = spectral.gradient(J.components, grid)
    dphi = spectral.gradient(phi.components, grid)
    contracted = np.einsum('...ijk,...k->...ij', dJ, dphi)
    return TwoForm(grid, 0.5 * (contracted - np.swapaxes(contracted, -1, -2)))


def class_coefficients(omega, omega_prime, classes):
    """
    Least-squares coefficients ``s`` with ``mean(w' - w) = sum s_i mean(chi_i)``.
    Exact forms have zero mean, so this recovers the class of ``w' - w``
    whenever the means of the ``chi_i`` are independent.
    """
    means = np.stack(
        [np.mean(_components(chi), axis=(0, 1, 2, 3))[np.triu_indices(4, 1)] for chi in classes],
        axis=-1,
    )
    target = np.mean(_components(omega_prime) - _components(omega), axis=(0, 1, 2, 3))
    coefficients, *_ = np.linalg.lstsq(means, target[np.triu_indices(4, 1)], rcond=None)
    return coefficients


def flat_l2_norm(a, grid):
    rank = np.ndim(a) - 4
    inner = np.sum(a * a, axis=tuple(range(4, 4 + rank))) / math.factorial(rank)
    return float(np.sqrt(spectral.integral(inner, grid)))


class Decomposition(NamedTuple):
    phi: ScalarField
    a: OneForm
    coefficients: np.ndarray
    residual: float


def ddc_array(J, phi, grid):
    """``d(J d phi)`` for a scalar array ``phi``."""
    return exterior_derivative(apply_j(J, spectral.gradient(phi, grid)), grid)


def reconstruct(omega, J, decomposition, classes=()):
    """``w + sum s_i chi_i - (1/2) d(J d phi) + d a``."""
    grid = omega.grid
    result = omega.components.copy()
    for weight, chi in zip(decomposition.coefficients, classes):
        result = result + weight * _components(chi)
    result = result - 0.5 * ddc_array(J.components, decomposition.phi.components, grid)
    result = result + exterior_derivative(decomposition.a.components, grid)
    return TwoForm(grid, result)


def decompose(omega, omega_prime, J, s, mode='fixed', classes=None, tol=DEFAULT_TOLERANCE):
    """
    Split ``w' - w`` into a class term, a potential term and an exact term.

    ``a_s`` solves ``d+_s a = (eta)+`` and ``d*_s a = 0`` with zero flat mean,
    where ``eta`` is what remains of ``w' - w`` after the class and potential
    terms are removed and ``+`` is the self-dual part for the metric of
    ``W_s``.

    :param classes: harmonic representatives ``[w, chi_1, chi_2]`` used in
        ``'drifting'`` mode; computed from the metric of ``omega`` if omitted
    :return: :class:`Decomposition` with the reconstruction residual
        ``||w' - reconstruction||_L2``
    """
    grid = omega.grid
    w = omega.components
    wp = omega_prime.components
    j = J.components
    phi = potentials(omega, omega_prime, J, s, mode=mode, tol=tol)
    if mode == 'drifting':
        if classes is None:
            classes = class_representatives(omega, J)
        coefficients = class_coefficients(w, wp, classes)
    else:
        classes = ()
        coefficients = np.zeros(0)
    class_term = sum(
        (c * _components(chi) for c, chi in zip(coefficients, classes)),
        np.zeros_like(w),
    )
    eta = wp - w - class_term + 0.5 * ddc_array(j, phi.components, grid)
    g_s = metric_array(interpolate(w, wp, s), j)
    g_s = 0.5 * (g_s + np.swapaxes(g_s, -1, -2))
    target = self_dual_array(eta, g_s)
    if np.max(np.abs(target)) == 0:
        a = np.zeros(grid.shape + (4,))
    else:
        columns = [np.broadcast_to(f, grid.shape + (4, 4)) for f in FLAT_SELF_DUAL]
        system = FormSystem(
            grid,
            operator=lambda beta: self_dual_array(exterior_derivative(beta, grid), g_s),
            gauge=lambda beta: codifferential_array(beta, g_s, grid),
            frame=FLAT_SELF_DUAL,
            columns=columns,
            tol=tol,
            label=f'decompose s={s:g}',
        )
        a, multipliers, _ = system.solve(frame_coordinates(target, FLAT_SELF_DUAL))
        logger.debug('decompose s=%g: harmonic multipliers %s', s, multipliers)
    decomposition = Decomposition(phi, OneForm(grid, a), coefficients, 0.0)
    rebuilt = reconstruct(omega, J, decomposition, classes)
    residual = flat_l2_norm(wp - rebuilt.components, grid)
    return decomposition._replace(residual=residual)
