import logging
from dataclasses import replace
from typing import NamedTuple

import numpy as np

from .diagnostics import diagnostics
from .exc import LostPositivity, NewtonDivergence, PathStalled
from .forms import l2_inner, wedge
from .potentials import flat_l2_norm
from .solver import Anchor, PathData, SolverConfig, SolverState, newton_solve_at_t
from .structure import Projectors

logger = logging.getLogger(__name__)

#: Remaining distance to t = 1 below which the path snaps to 1.
T_SNAP = 1e-12
#: Volume functions smaller than this are treated as zero.
ZERO_FORCING = 1e-14


class ContinuationPath:
    """
    One march of the continuation parameter from 0 to 1.

    The path owns the data fixed along the march, calls the Newton solver
    step by step and broadcasts its progress to the plugins of its manager.

    :param manager: :class:`~akcy.manager.ContinuationManager`
    :param triple: background :class:`~akcy.structure.AKTriple`
    :param F: normalized volume function
    :param config: :class:`~akcy.solver.SolverConfig`
    :param reference: form whose square is the target volume reference
        (defaults to the background form)
    :param seed: seed of the random perturbation of every Newton start
    """

    def __init__(self, manager, triple, F, config=None, reference=None, seed=None):
        self.manager = manager
        self.triple = triple
        self.F = F
        self.config = config or SolverConfig()
        self.seed = seed
        self.data = PathData.build(triple, F, self.config, reference=reference)
        self.reset()

    def reset(self):
        self.state = None
        self.records = []
        self.rejections = []
        self.steps = 0

    @property
    def plugins(self):
        return self.manager.plugins

    def notify_iteration(self, t, iteration, residual, step_length):
        self.plugins.after_newton_iteration(self, t, iteration, residual, step_length)

    def diagnose(self, state):
        if not self.manager.option('record_diagnostics'):
            return None
        drifting = self.config.class_mode == 'drifting'
        return diagnostics(
            self.triple,
            state.omega_prime,
            self.F,
            p=self.config.p,
            t=state.t,
            state=state,
            classes=self.data.classes if drifting else None,
            mode=self.config.class_mode,
            tol=self.config.linear_tol,
        )

    def accept(self, state):
        self.state = state
        record = self.diagnose(state)
        if record is not None:
            self.records.append(record)
        logger.info(
            'accepted t=%.6g after %d Newton iterations (volume residual %.3e)',
            state.t,
            state.newton_iters,
            state.residuals.volume,
        )
        self.plugins.after_accept_step(self, state, record)

    def reject(self, state, t, error):
        self.rejections.append((t, error))
        logger.warning('rejected step to t=%.6g: %s', t, error)
        self.plugins.after_reject_step(self, state, t, error)

    def _step_seed(self):
        if self.seed is None:
            return None
        return [self.seed, self.steps]

    def run(self):
        """
        March to ``t = 1``.

        :return: the final :class:`~akcy.solver.SolverState` and the list of
            diagnostics records, one per accepted step including ``t = 0``
        """
        self.reset()
        config = self.config
        self.plugins.before_path(self)
        state = SolverState.initial(self.data)
        if self.manager.option('initial_record'):
            self.accept(state)
        else:
            self.state = state

        if self.F.max_abs() < ZERO_FORCING:
            self.accept(replace(state, t=1.0))
            self.plugins.after_path(self, self.state, self.records)
            return self.state, self.records

        anchor = Anchor.build(state.omega_prime, state.t, self.data, config)
        dt = config.step_ceiling
        clean = 0
        t = state.t
        while t < 1.0:
            target = min(1.0, t + dt)
            if 1.0 - target < T_SNAP:
                target = 1.0
            self.plugins.before_step(self, state, target)
            try:
                candidate = newton_solve_at_t(
                    state,
                    target,
                    config,
                    self.data,
                    anchor=anchor,
                    seed=self._step_seed(),
                    notify=self.notify_iteration,
                )
            except (NewtonDivergence, LostPositivity) as error:
                self.reject(state, target, error)
                clean = 0
                dt /= 2
                if dt < config.dt_min:
                    raise PathStalled(
                        f'step length fell below {config.dt_min:g} at t={t:.6g}', t=t
                    ) from error
                continue
            self.steps += 1
            state = candidate
            t = target
            anchor = Anchor.build(state.omega_prime, state.t, self.data, config)
            self.accept(state)
            clean += 1
            if config.adaptive and clean >= 2:
                dt = min(2 * dt, config.step_ceiling)
                clean = 0
        self.plugins.after_path(self, state, self.records)
        return state, self.records


def continuity_path(triple, F, config=None, manager=None, **kwargs):
    """
    Solve ``w'^2 = e^F w^2`` by continuation from ``w`` at ``t = 0``.

    :return: ``(final SolverState, list of DiagnosticsRecord)``
    """
    if manager is None:
        from . import continuation_manager as manager
    return manager.path(triple, F, config, **kwargs).run()


class UniquenessReport(NamedTuple):
    difference: float
    wedge_defect: float
    anti_invariant_defect: float
    class_difference: float
    states: tuple

    def __float__(self):
        return self.difference


def uniqueness_test(triple, F, config=None, seeds=(1, 2), manager=None):
    """
    Solve twice from differently perturbed Newton starts and compare.

    For ``d = w'1 - w'2`` the report also contains ``||(w'1 + w'2) ^ d||``
    and ``||P d||``, both of which vanish exactly when ``d`` does.
    """
    if manager is None:
        from . import continuation_manager as manager
    states = tuple(
        manager.path(triple, F, config, seed=seed).run()[0] for seed in seeds
    )
    first, second = (state.omega_prime.components for state in states)
    grid = triple.grid
    delta = first - second
    difference = float(np.sqrt(max(l2_inner(delta, delta, triple.g.components, grid), 0.0)))
    report = UniquenessReport(
        difference=difference,
        wedge_defect=flat_l2_norm(wedge(first + second, delta), grid),
        anti_invariant_defect=flat_l2_norm(Projectors(triple.J).P_array(delta), grid),
        class_difference=float(np.max(np.abs(states[0].s - states[1].s))),
        states=states,
    )
    logger.info('uniqueness: ||w1 - w2|| = %.3e', difference)
    return report
