"""
Orchestration of the ``akcy`` commands. Each command returns a
:class:`~akcy.report.RunReport` that has already been written to the output
directory; its ``exit_code`` is the process exit status.
"""

import csv
import logging
import math
import time
from pathlib import Path

import numpy as np

from .connection import nijenhuis
from .continuity import continuity_path, uniqueness_test
from .diagnostics import diagnostics
from .dump import read_field
from .exc import AkcyError, DumpFormatError
from .fields import TwoForm
from .ledger import Ledger
from .manager import ContinuationManager
from .plugins import ClaimMonitorPlugin, ConvergenceLogPlugin, FieldDumpPlugin, LedgerPlugin
from .report import Criterion, RunReport, write_report
from .scenario import build_scenario
from .structure import Projectors
from .suites import SUITES, run_suites

logger = logging.getLogger(__name__)

EXIT_SUCCESS = 0
EXIT_CRITERIA = 2
EXIT_SOLVER = 3
EXIT_CONFIG = 4

TRACE_IDENTITY_TOLERANCE = 1e-7
LOWER_BOUND_TOLERANCE = 1e-7
COMPATIBILITY_TOLERANCE = 1e-8
UNIQUENESS_TOLERANCE = 1e-6
SLOPE_TOLERANCE = 0.1

SUITE_NAMES = tuple(SUITES)

SWEEP_COLUMNS = (
    'epsilon',
    'success',
    'steps',
    'final_residual',
    'nij_C0',
    'max_claim',
    'failure_stage',
)


class _Stage:
    """Times a stage and records it as the current one on the report."""

    def __init__(self, report, name):
        self.report = report
        self.name = name

    def __enter__(self):
        self.started = time.perf_counter()
        self.report.stage = self.name
        logger.debug('stage %s', self.name)
        return self

    def __exit__(self, *exc_info):
        self.report.timings[self.name] = time.perf_counter() - self.started
        return False


def _finish(report, path):
    if report.status == 'success':
        report.stage = None
        if report.failed_criteria:
            report.exit_code = EXIT_CRITERIA
    else:
        logger.error('%s failed in stage %s: %s', report.command, report.stage, report.error)
    write_report(report, path)
    return report


def _ledger_url(directory):
    return f'sqlite:///{Path(directory).resolve() / "ledger.sqlite"}'


def _final_criteria(config, triple, state, record):
    wp = state.omega_prime.components
    anti = float(np.max(np.abs(Projectors(triple.J).P_array(wp))))
    criteria = [
        Criterion.below(
            'pointwise volume error', state.residuals.pointwise_volume, 10 * config.solver.pointwise_tol
        ),
        Criterion.below('|P w\'|_C0', anti, COMPATIBILITY_TOLERANCE),
    ]
    if record is not None:
        criteria.extend(
            [
                Criterion('diagnostics finite', record.is_finite(), None, None),
                Criterion.above('min eigenvalue of g\'', record.min_eig_gprime, 0.0),
                Criterion.below(
                    'trace identity residual',
                    record.trace_identity_residual,
                    TRACE_IDENTITY_TOLERANCE,
                ),
                Criterion.above(
                    'lower bound margin of tr_g g\'',
                    record.lower_bound_margin,
                    -LOWER_BOUND_TOLERANCE,
                ),
            ]
        )
    return criteria


def run(config, ledger=None):
    """
    Build the scenario, march the continuity path and write the artifacts of
    ``config.outputs`` (convergence log, optional dumps, ledger, report).

    :param config: :class:`~akcy.config.RunConfig`
    :param ledger: shared :class:`~akcy.ledger.Ledger`; by default one is
        opened in the output directory when ``outputs.ledger`` is set
    """
    directory = Path(config.outputs.directory)
    directory.mkdir(parents=True, exist_ok=True)
    report = RunReport('run', config.as_dict())
    owns_ledger = ledger is None and config.outputs.ledger
    if owns_ledger:
        ledger = Ledger(_ledger_url(directory))
    session = run_row = None
    if ledger is not None:
        session = ledger.session()
        run_row = ledger.start_run(session, config)
        report.artifacts['ledger'] = str(ledger.url)
    nij_c0 = None
    try:
        with _Stage(report, 'scenario'):
            triple, F = build_scenario(config)
            nij_c0 = nijenhuis(triple.J).norms(triple.g, p=config.solver.p).c0
            report.residuals['nij_C0'] = nij_c0

        csv_path = directory / 'convergence.csv'
        claim = ClaimMonitorPlugin(config.solver.claim_threshold)
        plugins = [ConvergenceLogPlugin(csv_path), claim]
        report.artifacts['convergence_log'] = str(csv_path)
        if config.outputs.dump:
            plugins.append(FieldDumpPlugin(directory / 'dumps'))
            report.artifacts['dumps'] = str(directory / 'dumps')
        if ledger is not None:
            plugins.append(LedgerPlugin(ledger, session, run_row))
        manager = ContinuationManager(plugins=plugins)

        with _Stage(report, 'continuity'):
            state, records = continuity_path(triple, F, config.solver, manager=manager)
        record = records[-1] if records else None
        report.residuals.update(
            volume=state.residuals.volume,
            selfdual=state.residuals.selfdual,
            gauge=state.residuals.gauge,
            pointwise_volume=state.residuals.pointwise_volume,
            max_claim=claim.maximum,
            claim_exceedances=len(claim.exceedances),
        )
        if record is not None:
            report.diagnostics = record.as_dict()
        report.criteria.extend(_final_criteria(config, triple, state, record))

        if config.checks.uniqueness:
            with _Stage(report, 'uniqueness'):
                uniqueness = uniqueness_test(
                    triple,
                    F,
                    config.solver,
                    seeds=config.checks.uniqueness_seeds,
                    manager=ContinuationManager(options={'record_diagnostics': False}),
                )
            report.residuals['uniqueness'] = uniqueness.difference
            report.criteria.append(
                Criterion.below('uniqueness difference', uniqueness.difference, UNIQUENESS_TOLERANCE)
            )
    except AkcyError as error:
        report.fail(report.stage, f'{type(error).__name__}: {error}', EXIT_SOLVER)
    finally:
        if ledger is not None:
            ledger.finish_run(
                session,
                run_row,
                status=report.status,
                failure_stage=report.stage if report.status == 'failure' else None,
                final_residual=report.residuals.get('volume'),
                nijenhuis_c0=nij_c0,
            )
            report.run_id = run_row.id
            session.close()
            if owns_ledger:
                ledger.dispose()
    return _finish(report, directory / 'report.json')


def check(config, triple=None, names=None):
    """
    Run the property suites against the scenario of ``config`` (or against
    ``triple`` when given).
    """
    directory = Path(config.outputs.directory)
    directory.mkdir(parents=True, exist_ok=True)
    report = RunReport('check', config.as_dict())
    try:
        if triple is None:
            with _Stage(report, 'scenario'):
                triple, _ = build_scenario(config)
        with _Stage(report, 'suites'):
            report.criteria.extend(run_suites(config, triple, names, timings=report.timings))
    except AkcyError as error:
        report.fail(report.stage, f'{type(error).__name__}: {error}', EXIT_SOLVER)
    return _finish(report, directory / 'check.json')


def diagnose(dump_path, config, t=1.0):
    """Recompute a diagnostics record from a dumped ``w'``."""
    directory = Path(config.outputs.directory)
    directory.mkdir(parents=True, exist_ok=True)
    report = RunReport('diagnose', config.as_dict())
    report.artifacts['dump'] = str(dump_path)
    try:
        with _Stage(report, 'read'):
            omega_prime = read_field(dump_path)
            if not isinstance(omega_prime, TwoForm):
                raise DumpFormatError(f'{dump_path} does not hold a 2-form')
        with _Stage(report, 'scenario'):
            triple, F = build_scenario(config)
            if omega_prime.grid.n != triple.grid.n:
                raise DumpFormatError(
                    f'dump grid {omega_prime.grid.n} does not match configured grid {triple.grid.n}'
                )
        with _Stage(report, 'diagnostics'):
            record = diagnostics(
                triple,
                omega_prime,
                F,
                p=config.solver.p,
                t=t,
                mode=config.solver.class_mode,
                tol=config.solver.linear_tol,
            )
        report.diagnostics = record.as_dict()
        report.criteria.append(Criterion('diagnostics finite', record.is_finite(), None, None))
        report.criteria.append(
            Criterion.below(
                'trace identity residual', record.trace_identity_residual, TRACE_IDENTITY_TOLERANCE
            )
        )
    except DumpFormatError as error:
        report.fail(report.stage, f'{type(error).__name__}: {error}', EXIT_CONFIG)
    except AkcyError as error:
        report.fail(report.stage, f'{type(error).__name__}: {error}', EXIT_SOLVER)
    return _finish(report, directory / 'diagnose.json')


def loglog_slope(epsilons, values):
    """Least-squares slope of ``log values`` against ``log epsilons`` over positive pairs."""
    pairs = [
        (math.log(e), math.log(v))
        for e, v in zip(epsilons, values)
        if e and v and e > 0 and v > 0
    ]
    if len(pairs) < 2:
        return None
    x, y = np.array(pairs).T
    return float(np.polyfit(x, y, 1)[0])


def write_sweep_csv(path, rows):
    with Path(path).open('w', newline='') as stream:
        writer = csv.writer(stream)
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow(['' if row[column] is None else row[column] for column in SWEEP_COLUMNS])
    return path


def sweep(config, epsilons):
    """
    One perturbed run per epsilon, each in its own sub-directory, recorded in
    a shared ledger. Writes ``sweep.csv`` from a ledger query.
    """
    directory = Path(config.outputs.directory)
    directory.mkdir(parents=True, exist_ok=True)
    report = RunReport('sweep', config.as_dict())
    ledger = Ledger(_ledger_url(directory))
    report.artifacts['ledger'] = str(ledger.url)
    run_ids = []
    try:
        with _Stage(report, 'runs'):
            for index, epsilon in enumerate(epsilons):
                point = config.with_epsilon(epsilon, directory / f'eps_{index:02d}')
                logger.info('sweep point %d: epsilon = %g', index, epsilon)
                result = run(point, ledger=ledger)
                run_ids.append(result.run_id)
        session = ledger.session()
        try:
            rows = ledger.sweep_rows(session, run_ids)
        finally:
            session.close()
        csv_path = write_sweep_csv(directory / 'sweep.csv', rows)
        report.artifacts['sweep'] = str(csv_path)

        slope = loglog_slope([row['epsilon'] for row in rows], [row['nij_C0'] for row in rows])
        succeeded = [row['epsilon'] for row in rows if row['success']]
        report.residuals['largest_successful_epsilon'] = max(succeeded) if succeeded else None
        report.residuals['nij_C0_slope'] = slope
        if slope is not None:
            report.criteria.append(
                Criterion.below('log-log slope of ||N(J)||_C0 minus 1', abs(slope - 1), SLOPE_TOLERANCE)
            )
        for row in rows:
            report.criteria.append(
                Criterion.logged(f'epsilon {row["epsilon"]:g} completed', float(row['success']))
            )
    finally:
        ledger.dispose()
    return _finish(report, directory / 'sweep.json')
