"""
ConvergenceLogPlugin writes one CSV row per accepted continuation step::


    from akcy import continuation_manager
    from akcy.plugins import ConvergenceLogPlugin

    continuation_manager.plugins.append(ConvergenceLogPlugin('convergence.csv'))

Rows are appended as steps are accepted, so a failing path leaves the rows
of every step it completed.
"""

import csv
from pathlib import Path

from ..diagnostics import CSV_COLUMNS
from .base import Plugin


class ConvergenceLogPlugin(Plugin):
    def __init__(self, path):
        self.path = Path(path)
        self.rows = 0

    def before_path(self, path):
        self.rows = 0
        with self.path.open('w', newline='') as stream:
            csv.writer(stream).writerow(CSV_COLUMNS)

    def after_accept_step(self, path, state, record):
        if record is None:
            return
        with self.path.open('a', newline='') as stream:
            csv.writer(stream).writerow(record.as_row())
        self.rows += 1
