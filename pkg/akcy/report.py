"""JSON run reports."""

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

logger = logging.getLogger(__name__)

STATUSES = ('success', 'failure')

_NUMBER_OR_NULL = {'type': ['number', 'null']}

REPORT_SCHEMA = {
    '$schema': 'https://json-schema.org/draft/2020-12/schema',
    'title': 'akcy run report',
    'type': 'object',
    'required': [
        'command',
        'config',
        'status',
        'exit_code',
        'stage',
        'criteria',
        'residuals',
        'artifacts',
        'timings',
    ],
    'properties': {
        'command': {'enum': ['run', 'check', 'diagnose', 'sweep']},
        'config': {'type': 'object'},
        'status': {'enum': list(STATUSES)},
        'exit_code': {'type': 'integer', 'minimum': 0},
        'stage': {'type': ['string', 'null']},
        'error': {'type': ['string', 'null']},
        'criteria': {
            'type': 'array',
            'items': {
                'type': 'object',
                'required': ['name', 'passed', 'value', 'threshold'],
                'properties': {
                    'name': {'type': 'string'},
                    'passed': {'type': 'boolean'},
                    'value': _NUMBER_OR_NULL,
                    'threshold': _NUMBER_OR_NULL,
                    'suite': {'type': ['string', 'null']},
                },
            },
        },
        'residuals': {'type': 'object', 'additionalProperties': _NUMBER_OR_NULL},
        'artifacts': {'type': 'object', 'additionalProperties': {'type': 'string'}},
        'timings': {
            'type': 'object',
            'additionalProperties': {'type': 'number', 'minimum': 0},
        },
        'diagnostics': {'type': ['object', 'null']},
        'run_id': {'type': ['integer', 'null']},
    },
}


def _plain(value):
    """JSON-compatible copy of ``value``; non-finite numbers become null."""
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, Path):
        return str(value)
    return value


@dataclass
class Criterion:
    """One pass/fail entry; ``threshold`` is ``None`` for logged-only values."""

    name: str
    passed: bool
    value: float = None
    threshold: float = None
    suite: str = None

    @classmethod
    def below(cls, name, value, threshold, suite=None):
        value = float(value)
        return cls(name, bool(value < threshold), value, threshold, suite)

    @classmethod
    def above(cls, name, value, threshold, suite=None):
        value = float(value)
        return cls(name, bool(value > threshold), value, threshold, suite)

    @classmethod
    def logged(cls, name, value, suite=None):
        return cls(name, True, float(value), None, suite)


@dataclass
class RunReport:
    command: str
    config: dict
    status: str = 'success'
    exit_code: int = 0
    stage: str = None
    error: str = None
    criteria: list = field(default_factory=list)
    residuals: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    diagnostics: dict = None
    run_id: int = None

    @property
    def failed_criteria(self):
        return [criterion for criterion in self.criteria if not criterion.passed]

    @property
    def passed(self):
        return self.status == 'success' and not self.failed_criteria

    def fail(self, stage, error, exit_code):
        self.status = 'failure'
        self.stage = stage
        self.error = str(error)
        self.exit_code = exit_code

    def as_dict(self):
        return _plain(asdict(self))


def validate_report(document):
    jsonschema.validate(document, REPORT_SCHEMA, cls=jsonschema.Draft202012Validator)


def write_report(report, path):
    """Validate ``report`` against :data:`REPORT_SCHEMA` and write it to ``path``."""
    path = Path(path)
    report.artifacts.setdefault('report', str(path))
    document = report.as_dict()
    validate_report(document)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + '\n')
    logger.info('wrote %s report (%s) to %s', report.command, report.status, path)
    return path


def read_report(path):
    document = json.loads(Path(path).read_text())
    validate_report(document)
    return document
