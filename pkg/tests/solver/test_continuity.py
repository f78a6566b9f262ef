import numpy as np
from pytest import mark, raises

from akcy import (
    ContinuationManager,
    SolverConfig,
    continuation_manager,
    continuity_path,
    potentials,
    uniqueness_test,
)
from akcy.exc import PathStalled
from akcy.forms import wedge
from akcy.plugins import Plugin
from akcy.structure import Projectors
from tests import PerturbedTestCase, TestCase, sine_forcing


class EventRecorder(Plugin):
    def __init__(self):
        self.events = []

    def before_path(self, path):
        self.events.append('before_path')

    def after_path(self, path, state, records):
        self.events.append('after_path')

    def before_step(self, path, state, t):
        self.events.append(('before_step', t))

    def after_accept_step(self, path, state, record):
        self.events.append(('accept', state.t))

    def after_reject_step(self, path, state, t, error):
        self.events.append(('reject', t, type(error).__name__))


class TestZeroForcing(TestCase):
    def test_terminates_immediately(self):
        recorder = EventRecorder()
        manager = ContinuationManager(plugins=[recorder])
        state, records = continuity_path(self.triple, self.F, manager=manager)
        assert state.t == 1.0
        assert state.omega_prime is self.triple.omega
        assert [record.t for record in records] == [0.0, 1.0]
        assert recorder.events == ['before_path', ('accept', 0.0), ('accept', 1.0), 'after_path']

    def test_without_initial_record(self):
        manager = ContinuationManager(options={'initial_record': False})
        _, records = continuity_path(self.triple, self.F, manager=manager)
        assert [record.t for record in records] == [1.0]

    def test_without_diagnostics(self):
        manager = ContinuationManager(options={'record_diagnostics': False})
        state, records = continuity_path(self.triple, self.F, manager=manager)
        assert state.t == 1.0
        assert records == []

    def test_default_manager(self):
        recorder = EventRecorder()
        continuation_manager.plugins.append(recorder)
        continuity_path(self.triple, self.F)
        assert recorder.events[0] == 'before_path'


class TestKahlerContinuity(TestCase):
    n = (16, 16, 4, 4)
    forcing = sine_forcing()

    @mark.slow
    def test_solves_volume_equation(self):
        recorder = EventRecorder()
        manager = ContinuationManager(plugins=[recorder])
        state, records = continuity_path(self.triple, self.F, self.config.solver, manager=manager)
        assert state.t == 1.0
        wp = state.omega_prime.components
        target = np.exp(self.F.components) * 2.0
        assert np.max(np.abs(wedge(wp, wp) - target)) / 2.0 < 1e-8

        assert records[0].t == 0.0
        assert records[-1].t == 1.0
        assert all(record.is_finite() for record in records)
        assert all(record.claim_quantity < 1e-8 for record in records)
        ts = [record.t for record in records]
        assert ts == sorted(ts)
        accepted = [event for event in recorder.events if event[0] == 'accept']
        assert len(accepted) == len(records)

        phi_1 = potentials(self.triple.omega, state.omega_prime, self.triple.J, 1.0, mode='drifting')
        assert phi_1.oscillation() > 0
        for s in (0.0, 0.5):
            phi_s = potentials(self.triple.omega, state.omega_prime, self.triple.J, s, mode='drifting')
            assert np.max(np.abs(phi_s.components - phi_1.components)) < 1e-6 * phi_1.oscillation()

    def test_fixed_steps(self):
        config = SolverConfig(t_steps=2, dt_max=0.5)
        manager = ContinuationManager(options={'record_diagnostics': False})
        path = manager.path(self.triple, self.F, config)
        state, _ = path.run()
        assert state.t == 1.0
        assert path.steps == 2
        assert path.rejections == []

    def test_stalls_when_steps_become_too_short(self):
        recorder = EventRecorder()
        manager = ContinuationManager(
            options={'record_diagnostics': False}, plugins=[recorder]
        )
        config = SolverConfig(dt_min=0.2, newton_max_iter=1)
        with raises(PathStalled) as excinfo:
            continuity_path(self.triple, self.F, config, manager=manager)
        assert excinfo.value.t == 0.0
        rejected = [event for event in recorder.events if event[0] == 'reject']
        assert len(rejected) == 1
        assert rejected[0][1] == 0.25
        assert 'after_path' not in recorder.events

    @mark.slow
    def test_uniqueness(self):
        manager = ContinuationManager(options={'record_diagnostics': False})
        report = uniqueness_test(
            self.triple, self.F, SolverConfig(t_steps=2, dt_max=0.5), seeds=(1, 2), manager=manager
        )
        assert float(report) < 1e-6
        assert report.wedge_defect < 1e-6
        assert report.anti_invariant_defect < 1e-6
        assert len(report.states) == 2


@mark.slow
class TestPerturbedContinuity(PerturbedTestCase):
    n = (16, 16, 4, 4)
    epsilon = 1e-3
    forcing = sine_forcing()

    def test_solves_volume_equation(self):
        state, records = continuity_path(
            self.triple, self.F, self.config.solver, manager=ContinuationManager()
        )
        assert state.t == 1.0
        wp = state.omega_prime.components
        target = np.exp(self.F.components) * 2.0
        assert np.max(np.abs(wedge(wp, wp) - target)) / 2.0 < 1e-8
        assert np.max(np.abs(Projectors(self.triple.J).P_array(wp))) < 1e-8

        assert records[-1].t == 1.0
        assert records[-1].osc_phi1 > 0
        for record in records:
            assert record.is_finite()
            assert record.claim_quantity < 1e-6
            assert record.trace_identity_residual < 1e-8
            assert record.lower_bound_margin > -1e-10
            assert record.min_eig_gprime > 0

    def test_uniqueness(self):
        manager = ContinuationManager(options={'record_diagnostics': False})
        report = uniqueness_test(self.triple, self.F, self.config.solver, manager=manager)
        assert float(report) < 1e-6
        assert report.wedge_defect < 1e-6
        assert report.anti_invariant_defect < 1e-6
