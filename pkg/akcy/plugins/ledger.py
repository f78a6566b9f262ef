"""
LedgerPlugin stores every accepted and rejected continuation step as a
``Step`` row of a :class:`~akcy.ledger.Ledger` run::


    ledger = Ledger('sqlite:///ledger.sqlite')
    session = ledger.session()
    run = ledger.start_run(session, config)

    continuation_manager.plugins.append(LedgerPlugin(ledger, session, run))
"""

from .base import Plugin


class LedgerPlugin(Plugin):
    def __init__(self, ledger, session, run):
        self.ledger = ledger
        self.session = session
        self.run = run

    def add_step(self, **values):
        step = self.ledger.step_cls(run_id=self.run.id, **values)
        self.session.add(step)
        self.session.commit()
        return step

    def after_accept_step(self, path, state, record):
        self.add_step(
            t=state.t,
            accepted=True,
            newton_iters=state.newton_iters,
            residual=state.residuals.volume,
            claim_quantity=None if record is None else record.claim_quantity,
            osc_phi1=None if record is None else record.osc_phi1,
        )

    def after_reject_step(self, path, state, t, error):
        self.add_step(
            t=t,
            accepted=False,
            newton_iters=None,
            error=f'{type(error).__name__}: {error}',
        )
