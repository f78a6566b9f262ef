from pathlib import Path

from ..dump import write_field
from .base import Plugin


class FieldDumpPlugin(Plugin):
    """Dump ``w'_t`` of every accepted step as ``omega_prime_<index>.dump``."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.paths = []

    def before_path(self, path):
        self.directory.mkdir(parents=True, exist_ok=True)
        self.paths = []

    def after_accept_step(self, path, state, record):
        target = self.directory / f'omega_prime_{len(self.paths):04d}.dump'
        write_field(target, state.omega_prime)
        self.paths.append((state.t, target))
