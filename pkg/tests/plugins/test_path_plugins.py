import csv

from akcy import ContinuationManager, continuity_path
from akcy.diagnostics import CSV_COLUMNS
from akcy.dump import read_field
from akcy.exc import NewtonDivergence
from akcy.ledger import Ledger
from akcy.plugins import ConvergenceLogPlugin, FieldDumpPlugin, LedgerPlugin
from tests import TestCase


class TestConvergenceLogPlugin(TestCase):
    def test_writes_header_and_rows(self):
        plugin = ConvergenceLogPlugin(self.directory / 'convergence.csv')
        continuity_path(self.triple, self.F, manager=ContinuationManager(plugins=[plugin]))
        with (self.directory / 'convergence.csv').open() as stream:
            rows = list(csv.reader(stream))
        assert rows[0] == list(CSV_COLUMNS)
        assert len(rows) == 3
        assert plugin.rows == 2
        assert [float(row[0]) for row in rows[1:]] == [0.0, 1.0]
        assert rows[1][CSV_COLUMNS.index('fitted_A')] == ''

    def test_header_is_rewritten_for_each_path(self):
        plugin = ConvergenceLogPlugin(self.directory / 'convergence.csv')
        manager = ContinuationManager(plugins=[plugin])
        continuity_path(self.triple, self.F, manager=manager)
        continuity_path(self.triple, self.F, manager=manager)
        with (self.directory / 'convergence.csv').open() as stream:
            assert len(list(csv.reader(stream))) == 3


class TestFieldDumpPlugin(TestCase):
    def test_dumps_accepted_forms(self):
        plugin = FieldDumpPlugin(self.directory / 'dumps')
        continuity_path(self.triple, self.F, manager=ContinuationManager(plugins=[plugin]))
        assert [t for t, _ in plugin.paths] == [0.0, 1.0]
        _, last = plugin.paths[-1]
        assert last.name == 'omega_prime_0001.dump'
        field = read_field(last)
        assert (field.components == self.triple.omega.components).all()


class TestLedgerPlugin(TestCase):
    def setup_method(self, method):
        super().setup_method(method)
        self.ledger = Ledger('sqlite://')
        self.session = self.ledger.session()
        self.run = self.ledger.start_run(self.session, self.config)
        self.plugin = LedgerPlugin(self.ledger, self.session, self.run)

    def teardown_method(self, method):
        self.session.close()
        self.ledger.dispose()
        super().teardown_method(method)

    def test_accepted_steps(self):
        continuity_path(
            self.triple, self.F, manager=ContinuationManager(plugins=[self.plugin])
        )
        steps = self.run.steps
        assert [step.t for step in steps] == [0.0, 1.0]
        assert all(step.accepted for step in steps)
        assert steps[-1].claim_quantity == 0.0
        assert steps[-1].osc_phi1 == 0.0

    def test_steps_without_records(self):
        manager = ContinuationManager(
            options={'record_diagnostics': False}, plugins=[self.plugin]
        )
        continuity_path(self.triple, self.F, manager=manager)
        assert [step.claim_quantity for step in self.run.steps] == [None, None]

    def test_rejected_step(self):
        self.plugin.after_reject_step(None, None, 0.5, NewtonDivergence('no progress', t=0.5))
        step = self.session.query(self.ledger.step_cls).one()
        assert not step.accepted
        assert step.t == 0.5
        assert step.error == 'NewtonDivergence: no progress'
        assert step.run is self.run
