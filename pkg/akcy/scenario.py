"""Construction of the background triple and the volume function of a run."""

import itertools
import logging

import numpy as np

from .exc import AkcyError, ScenarioInvalid
from .fields import Metric, ScalarField
from .solver import normalize_F
from .spectral import gradient
from .structure import AKTriple, compatible_j_from_metric, standard_pair

logger = logging.getLogger(__name__)

#: Largest wavenumber of the metric bump along each varying axis.
BUMP_BAND = 1
COMPATIBILITY_TOLERANCE = 1e-10
CLOSED_TOLERANCE = 1e-8

_FORCING_FUNCTIONS = {'sin': np.sin, 'cos': np.cos}


def _bump_modes(axes):
    modes = []
    for values in itertools.product(range(-BUMP_BAND, BUMP_BAND + 1), repeat=len(axes)):
        if not any(values):
            continue
        mode = [0, 0, 0, 0]
        for axis, value in zip(axes, values):
            mode[axis] = value
        if tuple(-m for m in mode) not in modes:
            modes.append(tuple(mode))
    return modes


def metric_bump(grid, seed, axes=(0, 1, 2, 3)):
    """
    A band-limited symmetric field varying along ``axes`` only, scaled so that
    the largest first derivative of any component is 1.
    """
    for axis in axes:
        if not grid.resolves([BUMP_BAND if k == axis else 0 for k in range(4)]):
            raise ScenarioInvalid(
                f'axis {axis} with {grid.n[axis]} points cannot resolve the metric bump',
                invariant='band-limited bump',
            )
    rng = np.random.default_rng(seed)
    x = grid.coordinates
    bump = np.zeros(grid.shape + (4, 4))
    for mode in _bump_modes(axes):
        phase = sum(2 * np.pi * m * xk / period for m, xk, period in zip(mode, x, grid.periods))
        a, b = rng.standard_normal((2, 4, 4))
        bump += np.cos(phase)[..., None, None] * a + np.sin(phase)[..., None, None] * b
    bump = 0.5 * (bump + np.swapaxes(bump, -1, -2))
    slope = float(np.max(np.abs(gradient(bump, grid))))
    return bump / slope


def forcing_field(grid, terms):
    """Sum of the configured Fourier terms ``a * prod f(2 pi k_i x_i / L_i)``."""
    values = np.zeros(grid.shape)
    for term in terms:
        product = np.full(grid.shape, term.amplitude)
        f = _FORCING_FUNCTIONS[term.kind]
        for k, xk, period in zip(term.mode, grid.coordinates, grid.periods):
            if k:
                product = product * f(2 * np.pi * k * xk / period)
        values += product
    return ScalarField(grid, values)


def _verify(triple):
    report = triple.compatibility()
    checks = (
        ('J^2 = -Id', report.j_square < COMPATIBILITY_TOLERANCE),
        ('d omega = 0', report.d_omega < CLOSED_TOLERANCE),
        ('g symmetric', report.g_symmetry < COMPATIBILITY_TOLERANCE),
        ('g positive definite', report.g_min_eigenvalue > 0),
        ('omega J-invariant', report.j_invariance < COMPATIBILITY_TOLERANCE),
    )
    for invariant, holds in checks:
        if not holds:
            raise ScenarioInvalid(
                f'scenario triple violates {invariant}: {report.as_dict()}',
                invariant=invariant,
            )
    return report


def build_triple(grid, scenario):
    omega, J = standard_pair(grid)
    if scenario.name == 'kahler' or scenario.epsilon == 0:
        return AKTriple.from_pair(omega, J)
    h = np.eye(4) + scenario.epsilon * metric_bump(grid, scenario.seed, scenario.bump_axes)
    if float(np.min(np.linalg.eigvalsh(h))) <= 0:
        raise ScenarioInvalid(
            f'epsilon = {scenario.epsilon:g} makes the background metric indefinite',
            invariant='g positive definite',
        )
    try:
        J = compatible_j_from_metric(omega, Metric(grid, h))
        return AKTriple.from_pair(omega, J)
    except AkcyError as error:
        raise ScenarioInvalid(str(error), invariant=type(error).__name__) from error


def build_scenario(config):
    """
    Build ``(triple, F)`` for a :class:`~akcy.config.RunConfig`.

    The Kähler scenario is the standard flat triple. The perturbed scenario
    keeps the standard form and takes ``J`` from the polar decomposition of
    ``w`` against ``delta + epsilon S`` for a seeded bump ``S``.

    :raises ScenarioInvalid: naming the violated invariant
    """
    grid = config.grid.grid()
    triple = build_triple(grid, config.scenario)
    report = _verify(triple)
    F = normalize_F(forcing_field(grid, config.forcing), triple.omega)
    logger.info(
        'built %s scenario on n=%s (epsilon %g, J^2 defect %.1e, d omega %.1e)',
        config.scenario.name,
        'x'.join(map(str, grid.n)),
        config.scenario.epsilon,
        report.j_square,
        report.d_omega,
    )
    return triple, F
