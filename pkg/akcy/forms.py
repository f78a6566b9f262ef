"""
Exterior calculus on the torus.

Orientation is fixed by the standard symplectic form: the volume 4-form is
``V = dx1^dx3^dx2^dx4`` so that ``w0 = dx1^dx3 + dx2^dx4`` satisfies
``w0^w0 = 2V`` and is self-dual for the flat metric. All 4-form densities
below are coefficients of ``V``.

A k-form is stored with fully antisymmetric components, ``a = (1/k!) a_I dx^I``.
"""

import itertools
import math

import numpy as np

from . import spectral
from .fields import OneForm, ScalarField, TensorField, TwoForm


def _levi_civita():
    eps = np.zeros((4, 4, 4, 4))
    for perm in itertools.permutations(range(4)):
        inversions = sum(
            1 for a in range(4) for b in range(a + 1, 4) if perm[a] > perm[b]
        )
        eps[perm] = -1.0 if inversions % 2 else 1.0
    return eps


#: Levi-Civita symbol of the orientation ``V``; ``EPS[0, 2, 1, 3] == 1``.
EPS = -_levi_civita()


def basis_form(i, j):
    """Constant components of ``dx^i ^ dx^j`` (0-based indices)."""
    form = np.zeros((4, 4))
    form[i, j] = 1.0
    form[j, i] = -1.0
    return form


OMEGA_0 = basis_form(0, 2) + basis_form(1, 3)

#: Flat self-dual frame, pointwise orthonormal for the flat metric.
FLAT_SELF_DUAL = np.stack(
    [
        OMEGA_0,
        basis_form(0, 1) - basis_form(2, 3),
        basis_form(0, 3) - basis_form(1, 2),
    ]
) / np.sqrt(2)

FLAT_ANTI_SELF_DUAL = np.stack(
    [
        basis_form(0, 2) - basis_form(1, 3),
        basis_form(0, 1) + basis_form(2, 3),
        basis_form(0, 3) + basis_form(1, 2),
    ]
) / np.sqrt(2)

_FORM_CLASSES = {0: ScalarField, 1: OneForm, 2: TwoForm}


def as_form(grid, components):
    rank = np.ndim(components) - 4
    return _FORM_CLASSES.get(rank, TensorField)(grid, components)


def metric_arrays(g):
    """``(g, g^-1, sqrt det g)`` as arrays for a metric field or array."""
    components = getattr(g, 'components', g)
    return components, np.linalg.inv(components), np.sqrt(np.linalg.det(components))


def wedge(a, b):
    """Density of the 4-form ``a ^ b`` for 2-form arrays."""
    return 0.25 * np.einsum('ijkl,...ij,...kl->...', EPS, a, b)


def raise_all(a, ginv):
    """Raise every index of a covariant array with the inverse metric."""
    rank = np.ndim(a) - 4
    if rank == 2:
        return ginv @ a @ ginv
    metric = ginv.reshape(ginv.shape[:4] + (1,) * max(rank - 1, 0) + (4, 4))
    for slot in range(rank):
        moved = np.moveaxis(a, 4 + slot, -1)
        a = np.moveaxis(np.einsum('...ij,...j->...i', metric, moved), -1, 4 + slot)
    return a


def lower_all(a, g):
    return raise_all(a, g)


def pointwise_inner(a, b, ginv):
    """``(1/k!) a_I b^I`` for k-form arrays."""
    rank = np.ndim(a) - 4
    axes = tuple(range(4, 4 + rank))
    return np.sum(a * raise_all(b, ginv), axis=axes) / math.factorial(rank)


def l2_inner(a, b, g, grid):
    """L2 pairing of two k-form arrays for the metric ``g``."""
    _, ginv, sqrt_det = metric_arrays(g)
    return spectral.integral(pointwise_inner(a, b, ginv) * sqrt_det, grid)


def hodge_star_array(a, g):
    _, ginv, sqrt_det = metric_arrays(g)
    upper = raise_all(a, ginv)
    return 0.5 * sqrt_det[..., None, None] * np.einsum('...ij,ijkl->...kl', upper, EPS)


def self_dual_array(a, g):
    return 0.5 * (a + hodge_star_array(a, g))


def anti_self_dual_array(a, g):
    return 0.5 * (a - hodge_star_array(a, g))


def exterior_derivative(a, grid):
    """``(da)_{i0..ik} = sum_m (-1)^m d_{i_m} a_{i0..^i_m..ik}``."""
    rank = np.ndim(a) - 4
    grad = spectral.gradient(a, grid)
    return sum((-1) ** p * np.moveaxis(grad, 4, 4 + p) for p in range(rank + 1))


def codifferential_array(a, g, grid):
    """Formal L2(g) adjoint of ``d`` on k-form arrays."""
    g, ginv, sqrt_det = metric_arrays(g)
    rank = np.ndim(a) - 4
    density = raise_all(a, ginv) * sqrt_det.reshape(sqrt_det.shape + (1,) * rank)
    grad = spectral.gradient(density, grid)
    # contract the derivative index with the first slot of the form
    divergence = np.trace(grad, axis1=4, axis2=5)
    divergence = -divergence / sqrt_det.reshape(sqrt_det.shape + (1,) * (rank - 1))
    return lower_all(divergence, g)


def frame_coordinates(a, frame):
    """Pointwise flat coordinates ``(1/2) a_ij f^ij`` against a constant frame."""
    return 0.5 * np.einsum('aij,...ij->...a', frame, a)


def exterior_d(f):
    """Exterior derivative of a form field of rank at most 3."""
    return as_form(f.grid, exterior_derivative(f.components, f.grid))


def codifferential(g, f):
    """Codifferential of a form field of rank at least 1 for the metric ``g``."""
    return as_form(f.grid, codifferential_array(f.components, g, f.grid))


def hodge_star2(g):
    """
    Hodge star on 2-forms for the metric ``g``, returned as an operator.

    :param g: positive definite :class:`~akcy.fields.Metric`
    """

    def star(form):
        return TwoForm(form.grid, hodge_star_array(form.components, g))

    return star


def d_plus(g, a):
    """Self-dual part of ``da`` for the metric ``g``."""
    return TwoForm(a.grid, self_dual_array(exterior_derivative(a.components, a.grid), g))
