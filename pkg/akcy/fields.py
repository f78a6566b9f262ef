"""
Component storage for tensor fields on a :class:`~akcy.grid.Grid4`.

Components are held with shape ``(n1, n2, n3, n4, 4, ..., 4)``, one trailing
axis of length four per tensor slot. The variance signature is a string with
one character per slot, ``'d'`` for a covariant (lower) index and ``'u'`` for
a contravariant (upper) one. An almost complex structure ``J_i^j`` therefore
has variance ``'du'`` and ``J[..., i, j]`` holds ``J_i^j``.
:meth:`Metric.raise_index` and :meth:`Metric.lower_index` move one slot and
flip its character.

Fields are immutable: the component array is copied on construction and
marked read-only.
"""

import numpy as np

from .exc import InvalidField

ANTISYMMETRY_TOLERANCE = 1e-10
SYMMETRY_TOLERANCE = 1e-8


class TensorField:
    rank = None
    default_variance = None

    def __init__(self, grid, components, variance=None):
        components = np.array(components, dtype=float)
        if components.shape[:4] != grid.shape:
            components = self._broadcast(grid, components)
        rank = components.ndim - 4
        if self.rank is not None and rank != self.rank:
            raise InvalidField(
                f'{type(self).__name__} needs rank {self.rank}, got rank {rank}'
            )
        if components.shape[4:] != (4,) * rank:
            raise InvalidField(
                f'component axes must all have length 4, got {components.shape[4:]}'
            )
        if variance is None:
            variance = self.default_variance or 'd' * rank
        if len(variance) != rank or set(variance) - {'u', 'd'}:
            raise InvalidField(f'invalid variance {variance!r} for rank {rank}')
        if not np.all(np.isfinite(components)):
            raise InvalidField('field components must be finite')
        components.setflags(write=False)
        self.grid = grid
        self.components = components
        self.variance = variance
        self.validate()

    @staticmethod
    def _broadcast(grid, components):
        # A bare constant tensor is repeated over the grid.
        try:
            return np.array(
                np.broadcast_to(components, grid.shape + components.shape)
            )
        except ValueError:
            raise InvalidField(
                f'components of shape {components.shape} do not fit grid {grid.shape}'
            )

    def validate(self):
        pass

    @property
    def flat_components(self):
        """Row-major view with shape ``(n1, n2, n3, n4, 4**rank)``."""
        return self.components.reshape(self.grid.shape + (-1,))

    def replace(self, components):
        return type(self)(self.grid, components, self.variance)

    def _operand(self, other):
        if isinstance(other, TensorField):
            if other.grid != self.grid:
                raise InvalidField('fields live on different grids')
            if isinstance(other, ScalarField) and not isinstance(self, ScalarField):
                return other.components.reshape(
                    self.grid.shape + (1,) * (self.components.ndim - 4)
                )
            return other.components
        return other

    def __add__(self, other):
        return self.replace(self.components + self._operand(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self.replace(self.components - self._operand(other))

    def __rsub__(self, other):
        return self.replace(self._operand(other) - self.components)

    def __mul__(self, other):
        return self.replace(self.components * self._operand(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self.replace(self.components / self._operand(other))

    def __neg__(self):
        return self.replace(-self.components)

    def max_abs(self):
        return float(np.max(np.abs(self.components)))

    def __repr__(self):
        return '<{} variance={!r} grid={}>'.format(
            type(self).__name__, self.variance, self.grid.n
        )


class ScalarField(TensorField):
    rank = 0
    default_variance = ''

    def oscillation(self):
        return float(np.max(self.components) - np.min(self.components))

    def mean(self):
        return float(np.mean(self.components))


class OneForm(TensorField):
    rank = 1
    default_variance = 'd'


class TwoForm(TensorField):
    rank = 2
    default_variance = 'dd'

    def validate(self):
        scale = max(1.0, self.max_abs())
        asym = np.max(np.abs(self.components + np.swapaxes(self.components, -1, -2)))
        if asym > ANTISYMMETRY_TOLERANCE * scale:
            raise InvalidField(f'2-form components are not antisymmetric ({asym:.3e})')


class Metric(TensorField):
    rank = 2
    default_variance = 'dd'

    def validate(self):
        scale = max(1.0, self.max_abs())
        asym = np.max(np.abs(self.components - np.swapaxes(self.components, -1, -2)))
        if asym > SYMMETRY_TOLERANCE * scale:
            raise InvalidField(f'metric components are not symmetric ({asym:.3e})')

    @property
    def inverse(self):
        return np.linalg.inv(self.components)

    @property
    def sqrt_det(self):
        return np.sqrt(np.linalg.det(self.components))

    def min_eigenvalue(self):
        return float(np.min(np.linalg.eigvalsh(self.components)))

    def raise_index(self, field, slot=0):
        """Contract the covariant index ``slot`` of ``field`` with ``g^ij``."""
        return self._move_index(field, slot, 'd', self.inverse)

    def lower_index(self, field, slot=0):
        """Contract the contravariant index ``slot`` of ``field`` with ``g_ij``."""
        return self._move_index(field, slot, 'u', self.components)

    def _move_index(self, field, slot, current, matrix):
        if field.grid.shape != self.grid.shape:
            raise InvalidField(
                f'field on grid {field.grid.n} does not match metric on grid {self.grid.n}'
            )
        if not 0 <= slot < len(field.variance) or field.variance[slot] != current:
            raise InvalidField(
                f'slot {slot} of variance {field.variance!r} is not {current!r}'
            )
        rank = len(field.variance)
        moved = np.moveaxis(field.components, 4 + slot, -1)[..., None]
        matrix = matrix.reshape(self.grid.shape + (1,) * (rank - 1) + (4, 4))
        components = np.moveaxis((matrix @ moved)[..., 0], -1, 4 + slot)
        flipped = 'u' if current == 'd' else 'd'
        variance = field.variance[:slot] + flipped + field.variance[slot + 1 :]
        return TensorField(self.grid, components, variance)


class ACStructure(TensorField):
    """Almost complex structure, ``components[..., i, j] = J_i^j``."""

    rank = 2
    default_variance = 'du'

    def square_defect(self):
        """Pointwise max of ``|J_i^k J_k^j + delta_i^j|``."""
        square = self.components @ self.components
        return float(np.max(np.abs(square + np.eye(4))))
