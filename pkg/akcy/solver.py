"""
Newton solver for one step of the continuity path.

Near an anchor ``w~ = w'_{t0}`` the solution at ``t`` is sought as::

    w' = w~ + sigma_1 chi_1 + sigma_2 chi_2 + db

where ``chi_1, chi_2`` complete the background form to a harmonic self-dual
basis. The residual map is::

    Phi(b, sigma, t) = (log(w'^2 / w~^2) - (t - t0) F - c^) w~ / 2 + P(w' - w~)
    c^ = log(integral e^{-(t - t0) F} w'^2) - log(integral w~^2)

``Phi`` is self-dual for the anchor metric. The Newton system adds the gauge
``d*b = 0``, zero flat mean of ``b`` and a multiplier along ``w~`` so that the
linear problem is square. In ``'fixed'`` class mode ``sigma`` is not an
unknown; multipliers along the harmonic complement ``chi~`` of the anchor take
its place and must vanish at a solution.
"""

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import NamedTuple

import numpy as np

from . import spectral
from .exc import ConfigError, DimensionMismatch, LostPositivity, NewtonDivergence
from .fields import Metric, OneForm, ScalarField, TwoForm
from .forms import FLAT_SELF_DUAL, codifferential_array, exterior_derivative, frame_coordinates, wedge
from .harmonic import class_representatives, harmonic_self_dual_basis, pairing_matrix
from .krylov import FormSystem, _split_nyquist
from .potentials import class_coefficients, flat_l2_norm
from .structure import Projectors, metric_array

logger = logging.getLogger(__name__)

CLASS_MODES = ('drifting', 'fixed')
PAIRING_CONDITION_LIMIT = 1e8
COMPATIBILITY_TOLERANCE = 1e-8
MULTIPLIER_TOLERANCE = 1e-6


@dataclass(frozen=True)
class SolverConfig:
    """
    Parameters of the Newton iteration and the continuity path.

    ``t_steps`` is either ``'adaptive'`` or a positive number of equal steps,
    which also caps the adaptive step length at ``1 / t_steps``.
    ``volume_tol`` bounds the pointwise log-volume residual, Nyquist content
    included; zero means ``newton_tol``.
    """

    t_steps: object = 'adaptive'
    newton_tol: float = 1e-10
    volume_tol: float = 0.0
    newton_max_iter: int = 30
    backtrack_factor: float = 0.5
    max_backtracks: int = 20
    armijo: float = 1e-4
    p: float = 4.0
    claim_threshold: float = 1.0
    class_mode: str = 'drifting'
    linear_tol: float = 1e-10
    linear_maxiter: int = 500
    gmres_restart: int = 50
    dt_min: float = 1e-4
    dt_max: float = 0.25
    seed_amplitude: float = 1e-3

    def __post_init__(self):
        if self.t_steps != 'adaptive' and (
            isinstance(self.t_steps, bool)
            or not isinstance(self.t_steps, int)
            or self.t_steps < 1
        ):
            raise ConfigError(
                f"t_steps must be a positive integer or 'adaptive', got {self.t_steps!r}"
            )
        if not self.p > 2:
            raise ConfigError(f'p must be strictly larger than 2, got {self.p!r}')
        for name in ('newton_tol', 'linear_tol', 'armijo', 'claim_threshold', 'dt_min', 'dt_max'):
            if not getattr(self, name) > 0:
                raise ConfigError(f'{name} must be positive, got {getattr(self, name)!r}')
        for name in ('newton_max_iter', 'max_backtracks', 'linear_maxiter', 'gmres_restart'):
            if getattr(self, name) < 1:
                raise ConfigError(f'{name} must be at least 1, got {getattr(self, name)!r}')
        if not 0 < self.backtrack_factor < 1:
            raise ConfigError(
                f'backtrack_factor must lie in (0, 1), got {self.backtrack_factor!r}'
            )
        if self.dt_min > self.dt_max:
            raise ConfigError('dt_min must not exceed dt_max')
        if self.seed_amplitude < 0:
            raise ConfigError('seed_amplitude must not be negative')
        if self.volume_tol < 0:
            raise ConfigError('volume_tol must not be negative')
        if self.class_mode not in CLASS_MODES:
            raise ConfigError(
                f'class_mode must be one of {CLASS_MODES}, got {self.class_mode!r}'
            )

    @property
    def adaptive(self):
        return self.t_steps == 'adaptive'

    @property
    def pointwise_tol(self):
        return self.volume_tol or self.newton_tol

    @property
    def step_ceiling(self):
        if self.adaptive:
            return self.dt_max
        return min(self.dt_max, 1.0 / self.t_steps)

    def krylov_options(self, tol=None):
        return dict(
            tol=self.linear_tol if tol is None else tol,
            maxiter=self.linear_maxiter,
            restart=self.gmres_restart,
        )

    def as_dict(self):
        return asdict(self)


def normalize_F(F_raw, omega):
    """
    Shift ``F_raw`` by the constant that makes
    ``integral e^F w^2 = integral w^2``.

    :param F_raw: :class:`~akcy.fields.ScalarField`
    :param omega: the background symplectic form
    """
    grid = F_raw.grid
    density = wedge(omega.components, omega.components)
    shift = math.log(spectral.integral(density, grid)) - spectral.log_integral(
        F_raw.components, density, grid
    )
    return ScalarField(grid, F_raw.components + shift)


@dataclass(frozen=True)
class PathData:
    """
    Everything fixed along one continuity path.

    :param triple: the background :class:`~akcy.structure.AKTriple`
    :param F: normalized volume function
    :param classes: ``[w, chi_1, chi_2]`` for the background metric
    :param reference: form whose square is the target volume reference
    """

    triple: object
    F: ScalarField
    classes: tuple
    reference: TwoForm

    @classmethod
    def build(cls, triple, F, config=None, reference=None):
        config = config or SolverConfig()
        classes = tuple(class_representatives(triple.omega, triple.J, tol=config.linear_tol))
        return cls(triple, F, classes, triple.omega if reference is None else reference)

    @property
    def grid(self):
        return self.triple.grid

    @property
    def chis(self):
        return self.classes[1:]

    @property
    def reference_density(self):
        return wedge(self.reference.components, self.reference.components)

    @property
    def volume(self):
        return spectral.integral(self.reference_density, self.grid)

    def c_t(self, t):
        """``log(integral w^2 / integral e^{tF} w^2)``."""
        density = self.reference_density
        return math.log(self.volume) - spectral.log_integral(t * self.F.components, density, self.grid)

    def target_density(self, t):
        return np.exp(t * self.F.components + self.c_t(t)) * self.reference_density


@dataclass(frozen=True)
class Anchor:
    """The form ``w~`` at which a Newton step linearizes, with its harmonic data."""

    omega: TwoForm
    t0: float
    metric: Metric
    chi_tilde: tuple
    pairing: np.ndarray

    @classmethod
    def build(cls, omega, t0, data, config=None):
        config = config or SolverConfig()
        g = metric_array(omega.components, data.triple.J.components)
        metric = Metric(omega.grid, 0.5 * (g + np.swapaxes(g, -1, -2)))
        basis = harmonic_self_dual_basis(metric, tol=config.linear_tol)
        chi_tilde = basis.complement(omega)
        pairing = pairing_matrix(
            data.chis, [chi.components for chi in chi_tilde], omega.grid
        )
        condition = np.linalg.cond(pairing)
        if not condition < PAIRING_CONDITION_LIMIT:
            raise DimensionMismatch(
                f'pairing matrix of harmonic bases is singular (condition {condition:.3e})'
            )
        return cls(omega, t0, metric, chi_tilde, pairing)


class PhiValue(NamedTuple):
    residual: TwoForm
    c_hat: float
    omega_prime: TwoForm


class Residuals(NamedTuple):
    volume: float = 0.0
    selfdual: float = 0.0
    gauge: float = 0.0
    pointwise_volume: float = 0.0


@dataclass(frozen=True)
class SolverState:
    """
    An accepted point of the continuity path.

    ``b`` and ``sigma`` are the Newton unknowns relative to the anchor the
    state was solved from; ``s`` are the class coefficients of
    ``w' - w`` against ``[w, chi_1, chi_2]``.
    """

    t: float
    b: OneForm
    sigma: np.ndarray
    s: np.ndarray
    omega_prime: TwoForm
    c_hat: float = 0.0
    c_t: float = 0.0
    residuals: Residuals = field(default_factory=Residuals)
    newton_iters: int = 0
    pairing: np.ndarray = None
    multipliers: np.ndarray = None

    @classmethod
    def initial(cls, data):
        grid = data.grid
        return cls(
            t=0.0,
            b=OneForm(grid, np.zeros(4)),
            sigma=np.zeros(2),
            s=np.zeros(3),
            omega_prime=data.triple.omega,
            c_t=data.c_t(0.0),
            pairing=np.eye(2),
            multipliers=np.zeros(3),
        )

    def metric(self, J):
        g = metric_array(self.omega_prime.components, J.components)
        return Metric(self.omega_prime.grid, 0.5 * (g + np.swapaxes(g, -1, -2)))


class NewtonSystem:
    """
    Residual and Jacobian of the bordered Newton system at a fixed ``t``.

    The unknown vector has the layout of :class:`~akcy.krylov.FormSystem`:
    ``b`` followed by three multipliers and a gauge scalar. In drifting mode
    the first two multipliers are ``sigma``.
    """

    def __init__(self, anchor, data, t, config):
        self.anchor = anchor
        self.data = data
        self.t = t
        self.config = config
        self.grid = data.grid
        self.drifting = config.class_mode == 'drifting'
        self.projectors = Projectors(data.triple.J)
        self.omega_tilde = anchor.omega.components
        self.g_tilde = anchor.metric.components
        self.shift = (t - anchor.t0) * data.F.components
        self.weight = np.exp(-self.shift)
        self.log_density = np.log(wedge(self.omega_tilde, self.omega_tilde))
        self.log_volume = spectral.log_integral(self.log_density, 1.0, self.grid)
        self.npoints = self.grid.npoints

    def unpack(self, x):
        n = self.npoints
        b = np.reshape(x[: 4 * n], self.grid.shape + (4,))
        return b, x[4 * n : 4 * n + 3], x[4 * n + 3]

    def omega_prime(self, b, multipliers):
        result = self.omega_tilde + exterior_derivative(b, self.grid)
        if self.drifting:
            for weight, chi in zip(multipliers[:2], self.data.chis):
                result = result + weight * chi
        return result

    def evaluate(self, b, multipliers):
        """``(Phi, c^, w', log-volume residual)`` as arrays."""
        wp = self.omega_prime(b, multipliers)
        density = wedge(wp, wp)
        if np.any(density <= 0):
            raise LostPositivity(
                f'candidate form lost positivity (min density {float(np.min(density)):.3e})',
                t=self.t,
            )
        log_density = np.log(density)
        c_hat = spectral.log_integral(log_density - self.shift, 1.0, self.grid) - self.log_volume
        volume = log_density - self.log_density - self.shift - c_hat
        phi = 0.5 * volume[..., None, None] * self.omega_tilde + self.projectors.P_array(
            wp - self.omega_tilde
        )
        return phi, c_hat, wp, volume

    def residual(self, x):
        b, multipliers, mu = self.unpack(x)
        phi, c_hat, wp, volume = self.evaluate(b, multipliers)
        form = phi + multipliers[2] * self.omega_tilde
        if not self.drifting:
            for weight, chi in zip(multipliers[:2], self.anchor.chi_tilde):
                form = form + weight * chi.components
        rows = np.concatenate(
            [
                frame_coordinates(form, FLAT_SELF_DUAL),
                (codifferential_array(b, self.g_tilde, self.grid) + mu)[..., None],
            ],
            axis=-1,
        )
        rows, _ = _split_nyquist(rows, self.grid)
        G = np.concatenate(
            [rows[..., :3].ravel(), rows[..., 3].ravel(), b.mean(axis=(0, 1, 2, 3))]
        )
        return G, (phi, c_hat, wp, volume)

    def norm(self, G):
        return float(np.linalg.norm(G)) / math.sqrt(self.npoints)

    def converged(self, norm, evaluation):
        """
        The resolved residual is below ``newton_tol`` and the pointwise
        log-volume residual, Nyquist content included, below ``volume_tol``.
        """
        config = self.config
        pointwise = float(np.max(np.abs(evaluation[3])))
        return norm < config.newton_tol and pointwise < config.pointwise_tol

    def linearization(self, wp):
        """The derivative of ``Phi`` at ``w'`` as a map on 2-form arrays."""
        density = wedge(wp, wp)
        weighted_total = float(np.sum(self.weight * density))

        def apply(delta):
            variation = 2 * wedge(wp, delta)
            d_c_hat = float(np.sum(self.weight * variation)) / weighted_total
            volume = variation / density - d_c_hat
            return 0.5 * volume[..., None, None] * self.omega_tilde + self.projectors.P_array(
                delta
            )

        return apply

    def jacobian(self, wp, tol):
        derivative = self.linearization(wp)
        grid = self.grid
        if self.drifting:
            columns = [derivative(chi) for chi in self.data.chis]
        else:
            columns = [chi.components for chi in self.anchor.chi_tilde]
        columns.append(self.omega_tilde)
        return FormSystem(
            grid,
            operator=lambda beta: derivative(exterior_derivative(beta, grid)),
            gauge=lambda beta: codifferential_array(beta, self.g_tilde, grid),
            frame=FLAT_SELF_DUAL,
            columns=columns,
            label=f'newton t={self.t:.6g}',
            **self.config.krylov_options(tol),
        )

    def solve(self, x, notify=None):
        """Damped Newton iteration from ``x``; returns ``(x, evaluation, iterations)``."""
        config = self.config
        G, evaluation = self.residual(x)
        norm = self.norm(G)
        step_length = 0.0
        for iteration in range(config.newton_max_iter + 1):
            logger.debug('t=%.6g newton %d: residual %.3e', self.t, iteration, norm)
            if notify is not None:
                notify(self.t, iteration, norm, step_length)
            if self.converged(norm, evaluation):
                return x, evaluation, iteration
            if iteration == config.newton_max_iter:
                break
            forcing = max(min(1e-2, norm), 1e-3 * config.newton_tol)
            delta = self.jacobian(evaluation[2], forcing).solve_vector(-G, strict=False)
            x, G, evaluation, norm, step_length = self._line_search(x, delta, norm)
        raise NewtonDivergence(
            f'Newton iteration did not converge in {config.newton_max_iter} steps '
            f'(residual {norm:.3e})',
            t=self.t,
        )

    def _line_search(self, x, delta, norm):
        config = self.config
        length = 1.0
        positivity_lost = False
        for _ in range(config.max_backtracks + 1):
            trial = x + length * delta
            try:
                G, evaluation = self.residual(trial)
            except LostPositivity:
                positivity_lost = True
            else:
                trial_norm = self.norm(G)
                if trial_norm <= (1 - config.armijo * length) * norm or self.converged(
                    trial_norm, evaluation
                ):
                    return trial, G, evaluation, trial_norm, length
            length *= config.backtrack_factor
        if positivity_lost:
            raise LostPositivity('line search could not restore positivity', t=self.t)
        raise NewtonDivergence(
            f'line search failed to reduce the residual {norm:.3e}', t=self.t
        )


def phi_map(b, s, t, anchor, data, config=None):
    """
    Evaluate the residual map at ``(b, s, t)``.

    :param b: :class:`~akcy.fields.OneForm` relative to the anchor
    :param s: coefficients of ``chi_1, chi_2``
    :param t: continuation parameter
    :param anchor: :class:`Anchor`
    :param data: :class:`PathData`
    """
    system = NewtonSystem(anchor, data, t, config or SolverConfig())
    multipliers = np.zeros(3)
    multipliers[:2] = s
    phi, c_hat, wp, _ = system.evaluate(np.asarray(b.components), multipliers)
    grid = data.grid
    return PhiValue(TwoForm(grid, phi), c_hat, TwoForm(grid, wp))


def phi_linearization(b, s, t, anchor, data, config=None):
    """Derivative of :func:`phi_map` in the ``w'`` direction, on 2-form arrays."""
    system = NewtonSystem(anchor, data, t, config or SolverConfig())
    multipliers = np.zeros(3)
    multipliers[:2] = s
    return system.linearization(system.omega_prime(np.asarray(b.components), multipliers))


def initial_perturbation(grid, rng, amplitude):
    """Low-mode random 1-form with amplitude ``amplitude``."""
    b = np.zeros(grid.shape + (4,))
    for component in range(4):
        for axis in range(4):
            phase = 2 * np.pi * grid.coordinates[axis] / grid.periods[axis]
            a, c = rng.normal(size=2)
            b[..., component] += amplitude * (a * np.cos(phase) + c * np.sin(phase))
    return b


def _accept(system, x, evaluation, iterations):
    data = system.data
    config = system.config
    grid = data.grid
    t = system.t
    b, multipliers, mu = system.unpack(x)
    _, c_hat, wp_raw, volume = evaluation
    if not system.drifting and np.max(np.abs(multipliers[:2])) > MULTIPLIER_TOLERANCE:
        raise NewtonDivergence(
            f'fixed-class solve needs a class drift (multipliers {multipliers[:2]})', t=t
        )
    scale = math.sqrt(data.volume / spectral.integral(wedge(wp_raw, wp_raw), grid))
    wp = scale * wp_raw
    J = data.triple.J
    anti = float(np.max(np.abs(system.projectors.P_array(wp))))
    if anti > COMPATIBILITY_TOLERANCE * max(1.0, float(np.max(np.abs(wp)))):
        raise NewtonDivergence(f'solution is not J-compatible (|P w\'| = {anti:.3e})', t=t)
    g_prime = metric_array(wp, J.components)
    lowest = float(np.min(np.linalg.eigvalsh(0.5 * (g_prime + np.swapaxes(g_prime, -1, -2)))))
    if lowest <= 0:
        raise LostPositivity(f'g\' is not positive definite (min eigenvalue {lowest:.3e})', t=t)
    pairing_with_omega = spectral.integral(wedge(wp, data.triple.omega.components), grid)
    if pairing_with_omega <= 0:
        raise LostPositivity('integral of w\' ^ w is not positive', t=t)
    target = data.target_density(t)
    reference = data.reference_density
    pointwise = float(np.max(np.abs(wedge(wp, wp) - target) / reference))
    limit = 10 * config.pointwise_tol
    if pointwise > limit:
        raise NewtonDivergence(
            f'pointwise volume error {pointwise:.3e} exceeds {limit:.1e}', t=t
        )
    residuals = Residuals(
        volume=flat_l2_norm(volume, grid),
        selfdual=flat_l2_norm(system.projectors.P_array(wp_raw - system.omega_tilde), grid),
        gauge=flat_l2_norm(codifferential_array(b, system.g_tilde, grid), grid),
        pointwise_volume=pointwise,
    )
    return SolverState(
        t=t,
        b=OneForm(grid, b),
        sigma=np.array(multipliers[:2]) if system.drifting else np.zeros(2),
        s=class_coefficients(data.triple.omega.components, wp, data.classes),
        omega_prime=TwoForm(grid, wp),
        c_hat=c_hat,
        c_t=data.c_t(t),
        residuals=residuals,
        newton_iters=iterations,
        pairing=system.anchor.pairing,
        multipliers=np.array(multipliers),
    )


def newton_solve_at_t(state, t, config, data, anchor=None, seed=None, notify=None):
    """
    Solve the problem at ``t`` starting from the converged ``state``.

    :param state: converged :class:`SolverState` used as the anchor
    :param t: target value of the continuation parameter
    :param config: :class:`SolverConfig`
    :param data: :class:`PathData`
    :param anchor: prebuilt :class:`Anchor` for ``state``
    :param seed: seed of a random perturbation of the initial guess
    :param notify: callable ``(t, iteration, residual, step_length)``
    """
    if anchor is None:
        anchor = Anchor.build(state.omega_prime, state.t, data, config)
    if t == anchor.t0 and seed is None:
        return replace(state, newton_iters=0)
    system = NewtonSystem(anchor, data, t, config)
    grid = data.grid
    x = np.zeros(4 * grid.npoints + 4)
    if seed is not None and config.seed_amplitude > 0:
        rng = np.random.default_rng(seed)
        b = initial_perturbation(grid, rng, config.seed_amplitude)
        x[: 4 * grid.npoints] = b.ravel()
        if system.drifting:
            x[4 * grid.npoints : 4 * grid.npoints + 2] = config.seed_amplitude * rng.normal(size=2)
    x, evaluation, iterations = system.solve(x, notify)
    state = _accept(system, x, evaluation, iterations)
    logger.debug(
        't=%.6g solved in %d Newton iterations, c^=%.6e', t, iterations, state.c_hat
    )
    return state
