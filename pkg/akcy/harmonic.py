"""
Harmonic self-dual 2-forms for a metric on the torus.

Every cohomology class of a constant flat self-dual form ``f`` contains a
unique ``g``-self-dual harmonic representative. It is found as
``chi = f + sum xi_k f-_k + d beta`` where ``f-_k`` are the flat
anti-self-dual constants and ``(beta, xi)`` solve::

    (1/2)(1 - *_g)(d beta + sum xi_k f-_k) = -(1/2)(1 - *_g) f,   d*_g beta = 0

The three representatives are then orthonormalized in ``L2(g)``.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .exc import DimensionMismatch, LinearSolveFailure
from .fields import Metric, TwoForm
from .forms import (
    FLAT_ANTI_SELF_DUAL,
    FLAT_SELF_DUAL,
    anti_self_dual_array,
    codifferential_array,
    exterior_derivative,
    frame_coordinates,
    l2_inner,
    wedge,
)
from .krylov import DEFAULT_TOLERANCE, FormSystem
from .structure import metric_array

logger = logging.getLogger(__name__)

RAYLEIGH_TOLERANCE = 1e-12
RANK_TOLERANCE = 1e-8
DEGENERACY_TOLERANCE = 1e-6


def _broadcast(constant, grid):
    return np.broadcast_to(constant, grid.shape + constant.shape)


@dataclass(frozen=True)
class HarmonicBasis:
    """``L2(g)``-orthonormal closed self-dual forms of a metric."""

    metric: Metric
    forms: tuple

    @property
    def grid(self):
        return self.metric.grid

    def __len__(self):
        return len(self.forms)

    def arrays(self):
        return [form.components for form in self.forms]

    def gram(self):
        g = self.metric.components
        return np.array(
            [[l2_inner(a, b, g, self.grid) for b in self.arrays()] for a in self.arrays()]
        )

    def rayleigh_quotients(self):
        """``(||d chi||^2 + ||(1/2)(1 - *) chi||^2) / ||chi||^2`` per form."""
        g = self.metric.components
        quotients = []
        for chi in self.arrays():
            d_chi = exterior_derivative(chi, self.grid)
            anti = anti_self_dual_array(chi, g)
            numerator = l2_inner(d_chi, d_chi, g, self.grid) + l2_inner(anti, anti, g, self.grid)
            quotients.append(numerator / l2_inner(chi, chi, g, self.grid))
        return np.array(quotients)

    def complement(self, omega):
        """
        Two ``L2(g)``-orthonormal forms spanning the orthogonal complement of
        ``omega`` in the harmonic space. ``omega`` must itself be harmonic
        self-dual for the metric, as the symplectic form of the metric is.
        """
        g = self.metric.components
        w = getattr(omega, 'components', omega)
        accepted = [w / np.sqrt(l2_inner(w, w, g, self.grid))]
        for chi in sorted(self.arrays(), key=lambda c: -abs(l2_inner(c, accepted[0], g, self.grid)))[1:]:
            for previous in accepted:
                chi = chi - l2_inner(chi, previous, g, self.grid) * previous
            norm = np.sqrt(max(l2_inner(chi, chi, g, self.grid), 0.0))
            if norm < DEGENERACY_TOLERANCE:
                raise DimensionMismatch('harmonic basis is degenerate against omega')
            accepted.append(chi / norm)
        return tuple(TwoForm(self.grid, chi) for chi in accepted[1:])


def harmonic_self_dual_basis(g, tol=DEFAULT_TOLERANCE):
    """
    :param g: positive definite :class:`~akcy.fields.Metric`
    :param tol: relative tolerance of the Krylov solves
    """
    grid = g.grid
    gv = g.components
    anti_columns = [anti_self_dual_array(_broadcast(f, grid), gv) for f in FLAT_ANTI_SELF_DUAL]
    system = FormSystem(
        grid,
        operator=lambda beta: anti_self_dual_array(exterior_derivative(beta, grid), gv),
        gauge=lambda beta: codifferential_array(beta, gv, grid),
        frame=FLAT_ANTI_SELF_DUAL,
        columns=anti_columns,
        tol=tol,
        label='harmonic basis',
    )
    candidates = []
    for seed in FLAT_SELF_DUAL:
        seed = _broadcast(seed, grid)
        target = -anti_self_dual_array(seed, gv)
        if np.max(np.abs(target)) == 0:
            candidates.append(np.array(seed))
            continue
        beta, xi, _ = system.solve(frame_coordinates(target, FLAT_ANTI_SELF_DUAL))
        chi = seed + np.einsum('k,kij->ij', xi, FLAT_ANTI_SELF_DUAL) + exterior_derivative(beta, grid)
        candidates.append(chi)

    gram = np.array([[l2_inner(a, b, gv, grid) for b in candidates] for a in candidates])
    eigenvalues, vectors = np.linalg.eigh(gram)
    if eigenvalues[0] < RANK_TOLERANCE * eigenvalues[-1]:
        raise DimensionMismatch(
            f'harmonic self-dual space has numerical dimension below 3 '
            f'(Gram eigenvalues {eigenvalues})'
        )
    inverse_sqrt = vectors @ np.diag(eigenvalues**-0.5) @ vectors.T
    forms = tuple(
        TwoForm(grid, sum(inverse_sqrt[b, a] * candidates[b] for b in range(3)))
        for a in range(3)
    )
    basis = HarmonicBasis(g, forms)
    quotients = basis.rayleigh_quotients()
    if np.any(quotients > RAYLEIGH_TOLERANCE):
        raise LinearSolveFailure(f'harmonic forms not converged (Rayleigh quotients {quotients})')
    logger.debug('harmonic basis: Gram eigenvalues %s', eigenvalues)
    return basis


def class_representatives(omega, J, tol=DEFAULT_TOLERANCE):
    """``[w, chi_1, chi_2]``: ``w`` and the complement of it in the harmonic space of its metric."""
    g = metric_array(omega.components, J.components)
    metric = Metric(omega.grid, 0.5 * (g + np.swapaxes(g, -1, -2)))
    chi_1, chi_2 = harmonic_self_dual_basis(metric, tol=tol).complement(omega)
    return [omega.components, chi_1.components, chi_2.components]


def pairing_matrix(chis, chi_tildes, grid):
    """``M[i, j] = integral of chi_j ^ chi~_i``."""
    return np.array(
        [
            [float(np.sum(wedge(chi, tilde)) * grid.cell_volume) for chi in chis]
            for tilde in chi_tildes
        ]
    )
