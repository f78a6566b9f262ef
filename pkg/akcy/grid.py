from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exc import InvalidGrid


def _as_quadruple(values, name, cast):
    try:
        values = tuple(cast(v) for v in values)
    except (TypeError, ValueError):
        raise InvalidGrid(f'{name} must be a sequence of four numbers, got {values!r}')
    if len(values) != 4:
        raise InvalidGrid(f'{name} must have exactly four entries, got {len(values)}')
    return values


@dataclass(frozen=True)
class Grid4:
    """
    Uniform periodic discretization of the flat 4-torus.

    :param n: points per axis, each even and at least 4
    :param periods: side lengths of the torus
    """

    n: tuple
    periods: tuple = (1.0, 1.0, 1.0, 1.0)

    def __post_init__(self):
        n = _as_quadruple(self.n, 'n', int)
        periods = _as_quadruple(self.periods, 'periods', float)
        for size in n:
            if size < 4 or size % 2:
                raise InvalidGrid(f'every axis size must be even and >= 4, got {n}')
        for period in periods:
            if not np.isfinite(period) or period <= 0:
                raise InvalidGrid(f'periods must be positive, got {periods}')
        object.__setattr__(self, 'n', n)
        object.__setattr__(self, 'periods', periods)

    @property
    def shape(self):
        return self.n

    @property
    def spacing(self):
        return tuple(p / k for p, k in zip(self.periods, self.n))

    @property
    def npoints(self):
        return int(np.prod(self.n))

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    @property
    def volume(self):
        return float(np.prod(self.periods))

    def axis(self, k):
        """Sample points along axis ``k`` (0-based)."""
        return np.arange(self.n[k]) * self.spacing[k]

    @cached_property
    def coordinates(self):
        return np.meshgrid(*(self.axis(k) for k in range(4)), indexing='ij')

    def broadcast(self, values, k):
        shape = [1, 1, 1, 1]
        shape[k] = self.n[k]
        return np.reshape(values, shape)

    @cached_property
    def wavenumbers(self):
        """Angular wavenumbers per axis, broadcastable over the grid."""
        return tuple(
            self.broadcast(
                2 * np.pi * np.fft.fftfreq(self.n[k], d=self.spacing[k]), k
            )
            for k in range(4)
        )

    @cached_property
    def derivative_wavenumbers(self):
        """
        Wavenumbers used by first derivatives. The Nyquist entry is zeroed so
        that derivatives of real fields stay real.
        """
        result = []
        for k, wave in enumerate(self.wavenumbers):
            wave = wave.copy()
            wave.reshape(-1)[self.n[k] // 2] = 0.0
            result.append(wave)
        return tuple(result)

    @cached_property
    def nyquist_mask(self):
        """True on Fourier modes carrying a Nyquist index along some axis."""
        mask = np.zeros(self.n, dtype=bool)
        for k in range(4):
            index = np.zeros(self.n[k], dtype=bool)
            index[self.n[k] // 2] = True
            mask |= self.broadcast(index, k)
        return mask

    @cached_property
    def laplacian_symbol(self):
        return -sum(wave**2 for wave in self.wavenumbers)

    def resolves(self, mode):
        """Whether an integer Fourier multi-index lies strictly below Nyquist."""
        return all(abs(int(m)) < size // 2 for m, size in zip(mode, self.n))

    def refined(self, factor=2, axes=(0, 1, 2, 3)):
        n = tuple(size * factor if k in axes else size for k, size in enumerate(self.n))
        return Grid4(n, self.periods)
