"""
Almost-Kähler structures: the compatible triple ``(omega, J, g)``, the P/Q
projectors and the polar-decomposition construction of compatible ``J``.

Conventions: ``J[..., i, j] = J_i^j`` acts on vectors by ``(JY)^j = Y^i J_i^j``
and on 1-forms by ``(Ja)_i = J_i^j a_j``. The metric is
``g(u, v) = omega(u, Jv)``, that is ``g_ij = omega_ik J_j^k``, and conversely
``omega_ij = J_i^k g_kj``.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exc import Degenerate, NotCompatible, NotTaming
from .fields import ACStructure, Metric, TwoForm
from .forms import OMEGA_0, exterior_derivative

SYMMETRY_TOLERANCE = 1e-8

#: The standard structure ``J_1^3 = J_2^4 = 1 = -J_3^1 = -J_4^2``.
J_0 = OMEGA_0.copy()


def standard_pair(grid):
    return TwoForm(grid, OMEGA_0), ACStructure(grid, J_0)


def metric_array(omega, J):
    return omega @ np.swapaxes(J, -1, -2)


def apply_j(J, one_form):
    """``(Ja)_i = J_i^j a_j`` on a 1-form array."""
    return np.einsum('...ij,...j->...i', J, one_form)


def metric_from_pair(omega, J):
    """
    The metric ``g(., .) = omega(., J.)`` of a compatible pair.

    :param omega: the symplectic :class:`~akcy.fields.TwoForm`
    :param J: an :class:`~akcy.fields.ACStructure` compatible with ``omega``
    """
    g = metric_array(omega.components, J.components)
    scale = max(1.0, float(np.max(np.abs(g))))
    defect = float(np.max(np.abs(g - np.swapaxes(g, -1, -2))))
    if defect > SYMMETRY_TOLERANCE * scale:
        raise NotCompatible(f'omega(., J.) is not symmetric (defect {defect:.3e})')
    g = 0.5 * (g + np.swapaxes(g, -1, -2))
    lowest = float(np.min(np.linalg.eigvalsh(g)))
    if lowest <= 0:
        raise NotTaming(f'omega(., J.) is not positive (min eigenvalue {lowest:.3e})')
    return Metric(omega.grid, g)


@dataclass(frozen=True)
class CompatibilityReport:
    j_square: float
    d_omega: float
    g_symmetry: float
    g_min_eigenvalue: float
    j_invariance: float

    def passed(self, tolerance=1e-10, closed_tolerance=1e-8):
        return (
            self.j_square < tolerance
            and self.d_omega < closed_tolerance
            and self.g_symmetry < tolerance
            and self.g_min_eigenvalue > 0
            and self.j_invariance < tolerance
        )

    def as_dict(self):
        return dict(self.__dict__)


def check_compatibility(omega, J):
    """Report the deviations of ``(omega, J)`` from an almost-Kähler pair."""
    w = omega.components
    j = J.components
    g = metric_array(w, j)
    sym = 0.5 * (g + np.swapaxes(g, -1, -2))
    return CompatibilityReport(
        j_square=float(np.max(np.abs(j @ j + np.eye(4)))),
        d_omega=float(np.max(np.abs(exterior_derivative(w, omega.grid)))),
        g_symmetry=float(np.max(np.abs(g - np.swapaxes(g, -1, -2)))),
        g_min_eigenvalue=float(np.min(np.linalg.eigvalsh(sym))),
        j_invariance=float(np.max(np.abs(j @ w @ np.swapaxes(j, -1, -2) - w))),
    )


@dataclass(frozen=True)
class AKTriple:
    """A mutually compatible ``(omega, J, g)``."""

    omega: TwoForm
    J: ACStructure
    g: Metric

    @classmethod
    def from_pair(cls, omega, J):
        return cls(omega, J, metric_from_pair(omega, J))

    @classmethod
    def standard(cls, grid):
        return cls.from_pair(*standard_pair(grid))

    @property
    def grid(self):
        return self.omega.grid

    def compatibility(self):
        return check_compatibility(self.omega, self.J)

class Projectors:
    """
    The pointwise projectors ``P = (1/2)(1 - J.J)`` and ``Q = (1/2)(1 + J.J)``
    acting on covariant 2-tensors, ``(Pa)_kl = P^ij_kl a_ij``.
    """

    def __init__(self, J):
        self.J = J
        self._j = J.components
        self._jt = np.swapaxes(self._j, -1, -2)

    def _conjugate(self, a):
        return self._j @ a @ self._jt

    def P_array(self, a):
        return 0.5 * (a - self._conjugate(a))

    def Q_array(self, a):
        return 0.5 * (a + self._conjugate(a))

    def P(self, field):
        return field.replace(self.P_array(field.components))

    def Q(self, field):
        return field.replace(self.Q_array(field.components))

    @cached_property
    def tensor(self):
        """``P^ij_kl`` as an array indexed ``[..., i, j, k, l]``."""
        delta = np.eye(4)
        identity = np.einsum('ki,lj->ijkl', delta, delta)
        jj = np.einsum('...ki,...lj->...ijkl', self._j, self._j)
        return 0.5 * (identity - jj)


def projectors(J):
    return Projectors(J)


def compatible_j_from_metric(omega, h):
    """
    The almost complex structure obtained by polar decomposition of ``omega``
    relative to the metric ``h``. With ``omega(u, v) = h(Au, v)`` the result
    is ``J = A (-A^2)^{-1/2}``, which is ``omega``-compatible.

    :param omega: nondegenerate 2-form
    :param h: positive definite metric
    """
    w = omega.components
    hv = h.components
    det = np.linalg.det(w)
    if np.any(np.abs(det) < 1e-12):
        raise Degenerate('omega is degenerate somewhere on the grid')
    lam, vecs = np.linalg.eigh(hv)
    vt = np.swapaxes(vecs, -1, -2)
    h_half = vecs @ (np.sqrt(lam)[..., None] * vt)
    h_inv_half = vecs @ (lam[..., None] ** -0.5 * vt)
    # B = h^{1/2} A h^{-1/2} is skew for A = -h^{-1} omega
    B = -h_inv_half @ w @ h_inv_half
    mu, wvecs = np.linalg.eigh(-B @ B)
    if np.any(mu <= 1e-14):
        raise Degenerate('omega is degenerate relative to h')
    wt = np.swapaxes(wvecs, -1, -2)
    inv_sqrt = wvecs @ (mu[..., None] ** -0.5 * wt)
    j_vectors = h_inv_half @ B @ inv_sqrt @ h_half
    return ACStructure(omega.grid, np.swapaxes(j_vectors, -1, -2))
