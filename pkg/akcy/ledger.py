"""
Persistent record of runs and continuation steps.

The ledger owns its own declarative base; ``Run`` and ``Step`` are built on
it by model factories the first time a ledger is created for a base::


    ledger = Ledger('sqlite:///out/ledger.sqlite')
    session = ledger.session()
    run = ledger.start_run(session, config)
    ...
    ledger.finish_run(session, run, status='success', final_residual=1e-12)
"""

import json
import logging
from datetime import datetime, timezone

import sqlalchemy as sa
from sqlalchemy.orm import declarative_base, relationship, sessionmaker

from .factory import ModelFactory

logger = logging.getLogger(__name__)

RUN_STATUSES = ('running', 'success', 'failure')


def utc_now():
    return datetime.now(timezone.utc)


class RunBase:
    started_at = sa.Column(sa.DateTime, default=utc_now)
    finished_at = sa.Column(sa.DateTime)
    scenario = sa.Column(sa.String(32), nullable=False)
    epsilon = sa.Column(sa.Float, nullable=False, default=0.0)
    grid = sa.Column(sa.String(64))
    status = sa.Column(sa.String(16), nullable=False, default='running')
    failure_stage = sa.Column(sa.String(32))
    final_residual = sa.Column(sa.Float)
    nijenhuis_c0 = sa.Column(sa.Float)
    config = sa.Column(sa.Text)

    @property
    def succeeded(self):
        return self.status == 'success'

    def __repr__(self):
        return (
            f'<Run id={self.id} scenario={self.scenario!r} '
            f'epsilon={self.epsilon!r} status={self.status!r}>'
        )


class StepBase:
    t = sa.Column(sa.Float, nullable=False)
    accepted = sa.Column(sa.Boolean, nullable=False)
    newton_iters = sa.Column(sa.Integer)
    residual = sa.Column(sa.Float)
    claim_quantity = sa.Column(sa.Float)
    osc_phi1 = sa.Column(sa.Float)
    error = sa.Column(sa.Text)

    def __repr__(self):
        return f'<Step run_id={self.run_id} t={self.t!r} accepted={self.accepted!r}>'


class RunFactory(ModelFactory):
    model_name = 'Run'

    def create_class(self, ledger):
        class Run(ledger.declarative_base, RunBase):
            __tablename__ = 'run'

            id = sa.Column(sa.Integer, primary_key=True, autoincrement=True)

        return Run


class StepFactory(ModelFactory):
    model_name = 'Step'

    def create_class(self, ledger):
        class Step(ledger.declarative_base, StepBase):
            __tablename__ = 'step'

            id = sa.Column(sa.Integer, primary_key=True, autoincrement=True)
            run_id = sa.Column(
                sa.Integer, sa.ForeignKey('run.id', ondelete='CASCADE'), index=True
            )

        Step.run = relationship(
            ledger.run_cls,
            backref=sa.orm.backref('steps', order_by=Step.id),
        )
        return Step


class Ledger:
    """
    :param url: SQLAlchemy database URL
    :param declarative_base: base to build the models on; a fresh one by
        default
    """

    def __init__(self, url, declarative_base=None):
        self.url = url
        self.declarative_base = declarative_base or _new_base()
        self.run_cls = RunFactory()(self)
        self.step_cls = StepFactory()(self)
        self.engine = sa.create_engine(url)
        self.declarative_base.metadata.create_all(self.engine)
        self._sessionmaker = sessionmaker(bind=self.engine)

    def session(self):
        return self._sessionmaker()

    def start_run(self, session, config):
        """Insert a ``running`` row for the run described by ``config``."""
        run = self.run_cls(
            scenario=config.scenario.name,
            epsilon=config.scenario.epsilon,
            grid='x'.join(str(size) for size in config.grid.n),
            status='running',
            config=json.dumps(config.as_dict(), sort_keys=True),
        )
        session.add(run)
        session.commit()
        logger.debug('ledger: started %r', run)
        return run

    def finish_run(self, session, run, status, failure_stage=None, **values):
        if status not in RUN_STATUSES:
            raise ValueError(f'unknown run status {status!r}')
        run.status = status
        run.failure_stage = failure_stage
        run.finished_at = utc_now()
        for key, value in values.items():
            setattr(run, key, value)
        session.commit()
        return run

    def sweep_rows(self, session, run_ids):
        """
        One row per run: ``epsilon, success, steps, final_residual, nij_C0,
        max_claim, failure_stage``, ordered by epsilon.
        """
        Run = self.run_cls
        Step = self.step_cls
        accepted = (
            sa.select(
                Step.run_id.label('run_id'),
                sa.func.count(Step.id).label('steps'),
                sa.func.max(Step.claim_quantity).label('max_claim'),
            )
            .where(Step.accepted.is_(True))
            .group_by(Step.run_id)
            .subquery()
        )
        query = (
            sa.select(Run, accepted.c.steps, accepted.c.max_claim)
            .outerjoin(accepted, accepted.c.run_id == Run.id)
            .where(Run.id.in_(list(run_ids)))
            .order_by(Run.epsilon, Run.id)
        )
        rows = []
        for run, steps, max_claim in session.execute(query):
            rows.append(
                dict(
                    epsilon=run.epsilon,
                    success=run.succeeded,
                    steps=steps or 0,
                    final_residual=run.final_residual,
                    nij_C0=run.nijenhuis_c0,
                    max_claim=max_claim,
                    failure_stage=run.failure_stage,
                )
            )
        return rows

    def dispose(self):
        self.engine.dispose()


def _new_base():
    return declarative_base()
