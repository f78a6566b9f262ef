"""
Property suites run by ``akcy check``.

Every suite takes a :class:`SuiteContext` and returns a list of
:class:`~akcy.report.Criterion`. Failures are report entries, never
exceptions.
"""

import logging
import math
import time
from dataclasses import replace
from typing import NamedTuple

import numpy as np

from . import spectral
from .config import ForcingTerm
from .connection import j_divergence, lemma32_check, nijenhuis, nijenhuis_ak_form, riemann_norm
from .exc import AkcyError
from .fields import Metric, ScalarField
from .forms import (
    codifferential_array,
    exterior_derivative,
    hodge_star_array,
    l2_inner,
    self_dual_array,
    wedge,
)
from .grid import Grid4
from .manager import ContinuationManager
from .potentials import ddc_array
from .report import Criterion
from .scenario import build_triple, forcing_field
from .solver import (
    Anchor,
    PathData,
    SolverState,
    initial_perturbation,
    normalize_F,
    phi_linearization,
    phi_map,
)
from .structure import AKTriple, Projectors, metric_array

logger = logging.getLogger(__name__)

PROJECTOR_TOLERANCE = 1e-10
HODGE_TOLERANCE = 1e-9
IDENTITY_TOLERANCE = 1e-10
ROUNDOFF_FLOOR = 1e-10
REFINEMENT_ORDER = 2.0
NIJENHUIS_TOLERANCE = 1e-6
FLAT_TOLERANCE = 1e-12
LEMMA_TOLERANCE = 1e-6
COARSE_VOLUME_TOL = 1e-6
LEMMA_FORCING = (ForcingTerm((1, 1, 0, 0), 0.1, 'sin'),)
KERNEL_DIMENSION = 4
KERNEL_ZERO = 1e-10
KERNEL_GAP = 1e-3
KERNEL_GRID = (4, 4, 4, 4)
LINEARIZATION_TOLERANCE = 1e-6
LINEARIZATION_DIRECTIONS = 10
FINITE_DIFFERENCE_STEP = 1e-5


class SuiteContext(NamedTuple):
    config: object
    triple: AKTriple
    rng: np.random.Generator

    @property
    def grid(self):
        return self.triple.grid

    def build(self, grid):
        return build_triple(grid, self.config.scenario)


def _random_band_limited(ctx, extra_shape=()):
    values = ctx.rng.standard_normal(ctx.grid.shape + extra_shape)
    return spectral.truncate_nyquist(values, ctx.grid)


def _random_two_form(ctx, band_limited=False):
    if band_limited:
        a = _random_band_limited(ctx, (4, 4))
    else:
        a = ctx.rng.standard_normal(ctx.grid.shape + (4, 4))
    return a - np.swapaxes(a, -1, -2)


def _max(a):
    return float(np.max(np.abs(a)))


def field_core_suite(ctx):
    grid = ctx.grid
    f = _random_band_limited(ctx)
    h = _random_band_limited(ctx)
    scale = _max(f)
    mixed = [
        _max(
            spectral.derivative(spectral.derivative(f, grid, i), grid, j)
            - spectral.derivative(spectral.derivative(f, grid, j), grid, i)
        )
        for i in range(4)
        for j in range(i + 1, 4)
    ]
    by_parts = max(
        abs(
            spectral.integral(spectral.derivative(f, grid, i) * h, grid)
            + spectral.integral(f * spectral.derivative(h, grid, i), grid)
        )
        for i in range(4)
    ) / max(spectral.integral(np.abs(f * h), grid), 1e-300)
    rhs = f - np.mean(f)
    round_trip = _max(spectral.flat_laplacian_array(spectral.poisson_array(rhs, grid), grid) - rhs)

    a = _random_band_limited(ctx, (4,))
    chi = _random_two_form(ctx, band_limited=True)
    g = ctx.triple.g.components
    dd = _max(exterior_derivative(exterior_derivative(a, grid), grid))
    left = l2_inner(exterior_derivative(a, grid), chi, g, grid)
    right = l2_inner(a, codifferential_array(chi, g, grid), g, grid)
    adjoint = abs(left - right) / max(abs(left), abs(right), 1e-300)
    star = hodge_star_array(chi, g)
    involution = _max(hodge_star_array(star, g) - chi) / _max(chi)
    return [
        Criterion.below('mixed partials commute', max(mixed) / scale, IDENTITY_TOLERANCE),
        Criterion.below('integration by parts', by_parts, IDENTITY_TOLERANCE),
        Criterion.below('flat Poisson round trip', round_trip / _max(rhs), IDENTITY_TOLERANCE),
        Criterion.below('d o d = 0', dd / _max(a), IDENTITY_TOLERANCE),
        Criterion.below('d* adjoint to d', adjoint, HODGE_TOLERANCE),
        Criterion.below('star o star = Id on 2-forms', involution, FLAT_TOLERANCE * 100),
    ]


def structure_suite(ctx):
    """Projector algebra and the pointwise structure of the triple."""
    triple = ctx.triple
    j = triple.J.components
    g = triple.g.components
    w = triple.omega.components
    projectors = Projectors(triple.J)
    P = projectors.P_array
    Q = projectors.Q_array
    a = ctx.rng.standard_normal(ctx.grid.shape + (4, 4))
    b = ctx.rng.standard_normal(ctx.grid.shape + (4, 4))
    ginv = np.linalg.inv(g)

    def inner(x, y):
        return np.einsum('...ik,...jl,...ij,...kl->...', ginv, ginv, x, y, optimize=True)

    report = triple.compatibility()
    values = {
        'P + Q = Id': _max(P(a) + Q(a) - a),
        'P^2 = P': _max(P(P(a)) - P(a)),
        'Q^2 = Q': _max(Q(Q(a)) - Q(a)),
        'PQ = 0': _max(P(Q(a))),
        'P self-adjoint for g': _max(inner(P(a), b) - inner(a, P(b))),
        'P g = 0': _max(P(g)),
        'P omega = 0': _max(P(w)),
        'J^2 = -Id': report.j_square,
        'omega(J., J.) = omega': report.j_invariance,
        'g symmetric': report.g_symmetry,
    }
    criteria = [
        Criterion.below(name, value, PROJECTOR_TOLERANCE) for name, value in values.items()
    ]
    criteria.append(Criterion.below('d omega = 0', report.d_omega, 1e-8))
    criteria.append(Criterion.above('min eigenvalue of g', report.g_min_eigenvalue, 0.0))
    return criteria


def hodge_suite(ctx):
    """``(1 + *) chi / 2 = (w ^ chi / w^2) w + P chi`` for random ``chi``."""
    triple = ctx.triple
    w = triple.omega.components
    g = triple.g.components
    density = wedge(w, w)
    P = Projectors(triple.J).P_array
    worst = 0.0
    for _ in range(ctx.config.checks.random_forms):
        chi = _random_two_form(ctx)
        expected = (wedge(w, chi) / density)[..., None, None] * w + P(chi)
        worst = max(worst, _max(self_dual_array(chi, g) - expected))
    return [Criterion.below('self-dual projection formula', worst, HODGE_TOLERANCE)]


def _coarsened(grid, axes):
    n = list(grid.n)
    changed = False
    for axis in axes:
        if n[axis] // 2 >= 4 and (n[axis] // 2) % 2 == 0:
            n[axis] //= 2
            changed = True
    return Grid4(tuple(n), grid.periods) if changed else None


def _refinement(ctx, measure, name, tolerance=ROUNDOFF_FLOOR):
    """
    Compare ``measure`` on a grid coarsened along the bump axes with its value
    on the configured grid; passes when the observed order is at least two or
    the fine value is already at roundoff.
    """
    fine = measure(ctx.triple)
    coarse_grid = _coarsened(ctx.grid, ctx.config.scenario.bump_axes)
    criteria = []
    if coarse_grid is None or fine < tolerance:
        criteria.append(Criterion.below(name, fine, tolerance))
        return criteria, fine
    coarse = measure(ctx.build(coarse_grid))
    order = math.log2(coarse / fine) if fine > 0 and coarse > 0 else math.inf
    criteria.append(Criterion(name, bool(order >= REFINEMENT_ORDER), fine, None))
    criteria.append(Criterion.logged(f'{name}: observed order', order))
    return criteria, fine


def harmonicity_suite(ctx):
    """``nabla_i J_j^i = 0``, checked under grid refinement."""
    criteria, _ = _refinement(
        ctx,
        lambda triple: _max(j_divergence(triple.J, triple.g).components),
        'divergence of J vanishes',
    )
    return criteria


def nijenhuis_suite(ctx):
    """Coordinate and Levi-Civita forms of the Nijenhuis tensor agree."""

    def difference(triple):
        return _max(
            nijenhuis(triple.J).components - nijenhuis_ak_form(triple.J, triple.g).components
        )

    fine = difference(ctx.triple)
    criteria = [Criterion.below('Nijenhuis formulas agree', fine, NIJENHUIS_TOLERANCE)]
    coarse_grid = _coarsened(ctx.grid, ctx.config.scenario.bump_axes)
    if coarse_grid is not None and fine > ROUNDOFF_FLOOR:
        coarse = difference(ctx.build(coarse_grid))
        criteria.append(
            Criterion('Nijenhuis formulas improve under refinement', bool(fine < coarse), fine, None)
        )
    flat = AKTriple.standard(ctx.grid)
    criteria.append(
        Criterion.below(
            'Nijenhuis tensor of constant J vanishes',
            max(_max(nijenhuis(flat.J).components), _max(nijenhuis_ak_form(flat.J, flat.g).components)),
            FLAT_TOLERANCE,
        )
    )
    norms = nijenhuis(ctx.triple.J).norms(ctx.triple.g, p=ctx.config.solver.p)
    criteria.append(Criterion.logged('||N(J)||_C0', norms.c0))
    criteria.append(Criterion.logged('||N(J)||_L1', norms.l1))
    return criteria


def _kahler_metric(ctx, triple):
    """Metric of ``w - (1/2) d(J d phi)`` for a small band-limited ``phi``."""
    grid = triple.grid
    x = grid.coordinates
    phi = 0.02 * np.sin(2 * np.pi * x[0] / grid.periods[0]) * np.cos(
        2 * np.pi * x[1] / grid.periods[1]
    ) / (2 * np.pi) ** 2
    omega_prime = triple.omega.components - 0.5 * ddc_array(triple.J.components, phi, grid)
    g_prime = metric_array(omega_prime, triple.J.components)
    return Metric(grid, 0.5 * (g_prime + np.swapaxes(g_prime, -1, -2)))


def _solved_metric(triple, F, config):
    """Metric of the continuity solution ``w'`` for ``F`` on ``triple``."""
    manager = ContinuationManager(
        options={'record_diagnostics': False, 'initial_record': False}
    )
    state, _ = manager.path(triple, F, config).run()
    return state.metric(triple.J)


def _solved_identities(ctx, triple, config):
    terms = ctx.config.forcing or LEMMA_FORCING
    F = normalize_F(forcing_field(triple.grid, terms), triple.omega)
    return lemma32_check(triple, _solved_metric(triple, F, config))


def _solved_criteria(ctx):
    config = ctx.config.solver
    try:
        fine = _solved_identities(ctx, ctx.triple, config)
    except AkcyError as error:
        logger.warning('lemma32: no solution w\' on the configured grid: %s', error)
        return [Criterion('continuity solution w\' for the identities', False, None, None)]
    criteria = [
        Criterion.below('alpha identity, solved w\'', fine.alpha_residual, LEMMA_TOLERANCE),
        Criterion.below('beta identity, solved w\'', fine.beta_residual, LEMMA_TOLERANCE),
        Criterion.logged('max |alpha|, solved w\'', fine.alpha_norm),
        Criterion.logged('max |beta|, solved w\'', fine.beta_norm),
    ]
    coarse_grid = _coarsened(ctx.grid, ctx.config.scenario.bump_axes)
    if coarse_grid is None:
        return criteria
    # the coarse grid leaves Nyquist content in the volume equation
    coarse_config = replace(config, volume_tol=max(config.pointwise_tol, COARSE_VOLUME_TOL))
    try:
        coarse = _solved_identities(ctx, ctx.build(coarse_grid), coarse_config)
    except AkcyError as error:
        logger.warning('lemma32: no solution w\' on n=%s: %s', coarse_grid.n, error)
        criteria.append(
            Criterion('continuity solution w\' on the coarse grid', False, None, None)
        )
        return criteria
    fine_residual = max(fine.alpha_residual, fine.beta_residual)
    coarse_residual = max(coarse.alpha_residual, coarse.beta_residual)
    criteria.append(
        Criterion(
            'identities for solved w\' converge under refinement',
            bool(fine_residual <= coarse_residual or fine_residual < ROUNDOFF_FLOOR),
            fine_residual,
            None,
        )
    )
    criteria.append(
        Criterion.logged('identity residual, solved w\' on the coarse grid', coarse_residual)
    )
    return criteria


def lemma32_suite(ctx):
    """
    The alpha/beta identities for the metric of a second closed compatible
    form: the background metric itself, a Kähler potential on the flat
    triple, and the continuity solution on the scenario triple together with
    its value on a coarsened grid.
    """
    triple = ctx.triple
    same = lemma32_check(triple, triple.g)
    flat = AKTriple.standard(ctx.grid)
    kahler = lemma32_check(flat, _kahler_metric(ctx, flat))
    return [
        Criterion.below('alpha identity, g\' = g', same.alpha_residual, LEMMA_TOLERANCE),
        Criterion.below('beta identity, g\' = g', same.beta_residual, LEMMA_TOLERANCE),
        Criterion.below('alpha identity, Kähler potential', kahler.alpha_residual, IDENTITY_TOLERANCE),
        Criterion.below('beta identity, Kähler potential', kahler.beta_residual, IDENTITY_TOLERANCE),
        Criterion.below(
            'alpha and beta vanish for integrable J',
            max(kahler.alpha_norm, kahler.beta_norm),
            IDENTITY_TOLERANCE,
        ),
    ] + _solved_criteria(ctx)


def kernel_singular_values(triple):
    """
    Singular values of ``a -> (d+ a, sqrt(det g) d* a)`` restricted to 1-forms
    without Nyquist content, in increasing order.
    """
    grid = triple.grid
    g = triple.g.components
    sqrt_det = np.sqrt(np.linalg.det(g))
    n = grid.npoints
    identity = np.eye(n).reshape(grid.shape + (n,))
    projector = spectral.truncate_nyquist(identity, grid).reshape(n, n)
    eigenvalues, vectors = np.linalg.eigh(0.5 * (projector + projector.T))
    modes = vectors[:, eigenvalues > 0.5]
    upper = np.triu_indices(4, 1)
    columns = []
    for component in range(4):
        for mode in modes.T:
            a = np.zeros(grid.shape + (4,))
            a[..., component] = mode.reshape(grid.shape)
            plus = self_dual_array(exterior_derivative(a, grid), g)[..., upper[0], upper[1]]
            divergence = spectral.truncate_nyquist(sqrt_det * codifferential_array(a, g, grid), grid)
            columns.append(np.concatenate([plus.ravel(), divergence.ravel()]))
    matrix = np.stack(columns, axis=1)
    return np.sort(np.linalg.svd(matrix, compute_uv=False))


def kernel_suite(ctx):
    """The kernel of ``(d+, d*)`` is four-dimensional."""
    grid = Grid4(KERNEL_GRID, ctx.grid.periods)
    values = {'flat': kernel_singular_values(AKTriple.standard(grid))}
    if ctx.config.scenario.name != 'kahler':
        values['scenario'] = kernel_singular_values(ctx.build(grid))
    criteria = []
    for label, singular in values.items():
        criteria.append(
            Criterion.below(
                f'{label}: {KERNEL_DIMENSION} zero singular values of (d+, d*)',
                singular[KERNEL_DIMENSION - 1],
                KERNEL_ZERO,
            )
        )
        criteria.append(
            Criterion.above(
                f'{label}: gap above the kernel of (d+, d*)',
                singular[KERNEL_DIMENSION],
                KERNEL_GAP,
            )
        )
    return criteria


def linearization_suite(ctx):
    """
    At the anchor the derivative of the residual map in ``b`` is ``d+``;
    checked against central differences in random directions.
    """
    triple = ctx.triple
    grid = ctx.grid
    config = ctx.config.solver
    data = PathData.build(triple, ScalarField(grid, np.zeros(grid.shape)), config)
    state = SolverState.initial(data)
    anchor = Anchor.build(state.omega_prime, state.t, data, config)
    derivative = phi_linearization(state.b, np.zeros(2), 0.0, anchor, data, config)
    g_tilde = anchor.metric.components
    worst_identity = 0.0
    worst_difference = 0.0
    for _ in range(LINEARIZATION_DIRECTIONS):
        beta = initial_perturbation(grid, ctx.rng, 1.0)
        d_beta = exterior_derivative(beta, grid)
        linear = derivative(d_beta)
        expected = self_dual_array(d_beta, g_tilde)
        step = FINITE_DIFFERENCE_STEP
        forward = phi_map(state.b.replace(step * beta), np.zeros(2), 0.0, anchor, data, config)
        backward = phi_map(state.b.replace(-step * beta), np.zeros(2), 0.0, anchor, data, config)
        difference = (forward.residual.components - backward.residual.components) / (2 * step)
        scale = _max(expected)
        worst_identity = max(worst_identity, _max(linear - expected) / scale)
        worst_difference = max(worst_difference, _max(difference - expected) / scale)
    return [
        Criterion.below('linearization at the anchor is d+', worst_identity, LINEARIZATION_TOLERANCE),
        Criterion.below(
            'finite differences match d+ at the anchor', worst_difference, LINEARIZATION_TOLERANCE
        ),
    ]


def curvature_suite(ctx):
    """Logs ``||Rm||``, ``sup |nabla J|`` and the fitted constant between them."""
    rm, nabla_j = riemann_norm(ctx.triple.g, ctx.triple.J)
    fitted = nabla_j**2 / rm if rm > 0 else 0.0
    logger.info('curvature: ||Rm|| = %.3e, sup|nabla J| = %.3e, C = %.3e', rm, nabla_j, fitted)
    return [
        Criterion.logged('||Rm||_C0', rm),
        Criterion.logged('sup |nabla J|', nabla_j),
        Criterion.logged('sup |nabla J|^2 / ||Rm||_C0', fitted),
    ]


SUITES = {
    'field_core': field_core_suite,
    'structure': structure_suite,
    'hodge': hodge_suite,
    'harmonicity': harmonicity_suite,
    'nijenhuis': nijenhuis_suite,
    'lemma32': lemma32_suite,
    'kernel': kernel_suite,
    'linearization': linearization_suite,
    'curvature': curvature_suite,
}


def run_suites(config, triple, names=None, timings=None):
    """
    Run the named suites (all by default) against ``triple``.

    :param config: :class:`~akcy.config.RunConfig`
    :param triple: the scenario triple
    :param timings: optional dict receiving the wall-clock time per suite
    """
    rng = np.random.default_rng(config.scenario.seed)
    ctx = SuiteContext(config, triple, rng)
    criteria = []
    for name in names or SUITES:
        started = time.perf_counter()
        results = SUITES[name](ctx)
        for criterion in results:
            criterion.suite = name
        criteria.extend(results)
        if timings is not None:
            timings[f'suite_{name}'] = time.perf_counter() - started
        failed = [criterion.name for criterion in results if not criterion.passed]
        if failed:
            logger.warning('suite %s failed: %s', name, ', '.join(failed))
        else:
            logger.info('suite %s passed', name)
    return criteria
