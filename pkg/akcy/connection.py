"""
Levi-Civita calculus: Christoffel symbols, covariant derivatives of ``J`` and
of a second metric, the Nijenhuis tensor in both of its forms, curvature and
the pointwise identities relating them.

Index layout of the arrays returned here (after the four grid axes):

* ``christoffel_array``: ``[k, i, j] = Gamma^k_ij``
* ``nabla_j_array``: ``[m, j, l] = nabla_m J_j^l``
* ``nabla_metric_array``: ``[r, s, p] = nabla_r h_sp``
* Nijenhuis tensors: ``[i, j, k] = N^i_jk``
* ``riemann_array``: ``[r, s, m, n] = R^r_smn``
"""

import logging
from dataclasses import dataclass

import numpy as np

from . import spectral
from .exc import NotAlmostKahler
from .fields import Metric, OneForm, ScalarField, TensorField, TwoForm
from .forms import OMEGA_0, exterior_derivative, metric_arrays
from .structure import compatible_j_from_metric

logger = logging.getLogger(__name__)

CLOSED_TOLERANCE = 1e-8


def christoffel_array(g, grid):
    g, ginv, _ = metric_arrays(g)
    dg = spectral.gradient(g, grid)
    # lowered[i, j, l] = d_i g_jl + d_j g_il - d_l g_ij
    lowered = dg + np.swapaxes(dg, 4, 5) - np.moveaxis(dg, 4, 6)
    return 0.5 * np.einsum('...kl,...ijl->...kij', ginv, lowered)


def christoffel(g):
    return TensorField(g.grid, christoffel_array(g.components, g.grid), 'udd')


def nabla_j_array(J, gamma, grid):
    dJ = spectral.gradient(J, grid)
    return (
        dJ
        - np.einsum('...pmj,...pl->...mjl', gamma, J)
        + np.einsum('...lmp,...jp->...mjl', gamma, J)
    )


def nabla_metric_array(h, gamma, grid):
    dh = spectral.gradient(h, grid)
    return (
        dh
        - np.einsum('...qrs,...qp->...rsp', gamma, h)
        - np.einsum('...qrp,...sq->...rsp', gamma, h)
    )


def j_divergence(J, g):
    """``nabla_l J_j^l``; vanishes on almost-Kähler triples."""
    gamma = christoffel_array(g.components, g.grid)
    nabla = nabla_j_array(J.components, gamma, g.grid)
    return OneForm(g.grid, np.einsum('...mjm->...j', nabla))


def tensor_norm_array(N, g):
    """Pointwise ``|N|_g`` for a ``(1,2)``-tensor array."""
    g, ginv, _ = metric_arrays(g)
    lowered = np.einsum('...ia,...ijk->...ajk', g, N)
    square = np.einsum(
        '...ajk,...jb,...kc,...abc->...', lowered, ginv, ginv, N, optimize=True
    )
    return np.sqrt(np.maximum(square, 0.0))


@dataclass(frozen=True)
class NijenhuisNorms:
    l1: float
    lp: float
    c0: float
    p: float


class NijenhuisTensor(TensorField):
    rank = 3
    default_variance = 'udd'

    def norms(self, g, p=4):
        """L1, Lp and C0 norms with respect to the metric ``g``."""
        pointwise = tensor_norm_array(self.components, g.components)
        weight = g.sqrt_det
        return NijenhuisNorms(
            l1=spectral.integral(pointwise * weight, self.grid),
            lp=spectral.integral(pointwise**p * weight, self.grid) ** (1.0 / p),
            c0=float(np.max(pointwise)),
            p=p,
        )


def nijenhuis(J):
    """
    Coordinate Nijenhuis tensor
    ``N^i_jk = J_k^l d_l J_j^i + J_l^i d_j J_k^l - J_j^l d_l J_k^i - J_l^i d_k J_j^l``.
    """
    j = J.components
    dJ = spectral.gradient(j, J.grid)
    N = (
        np.einsum('...kl,...lji->...ijk', j, dJ)
        + np.einsum('...li,...jkl->...ijk', j, dJ)
        - np.einsum('...jl,...lki->...ijk', j, dJ)
        - np.einsum('...li,...kjl->...ijk', j, dJ)
    )
    return NijenhuisTensor(J.grid, N)


def nijenhuis_ak_form(J, g):
    """
    Nijenhuis tensor of an almost-Kähler triple through the Levi-Civita
    connection, ``N^i_jk = 2 g^im (nabla_m J_j^l) omega_kl``.
    """
    omega = J.components @ g.components
    closed = float(np.max(np.abs(exterior_derivative(omega, J.grid))))
    if closed > CLOSED_TOLERANCE * max(1.0, float(np.max(np.abs(omega)))):
        raise NotAlmostKahler(f'omega = J.g is not closed (|d omega| = {closed:.3e})')
    gamma = christoffel_array(g.components, g.grid)
    nabla = nabla_j_array(J.components, gamma, J.grid)
    ginv = np.linalg.inv(g.components)
    N = 2 * np.einsum('...im,...mjl,...kl->...ijk', ginv, nabla, omega, optimize=True)
    return NijenhuisTensor(J.grid, N)


def riemann_array(g, grid):
    gamma = christoffel_array(g, grid)
    dgamma = spectral.gradient(gamma, grid)
    return (
        np.einsum('...mrns->...rsmn', dgamma)
        - np.einsum('...nrms->...rsmn', dgamma)
        + np.einsum('...rml,...lns->...rsmn', gamma, gamma)
        - np.einsum('...rnl,...lms->...rsmn', gamma, gamma)
    )


def riemann(g):
    return TensorField(g.grid, riemann_array(g.components, g.grid), 'uddd')


def scalar_curvature(g):
    R = riemann_array(g.components, g.grid)
    ricci = np.einsum('...rsrn->...sn', R)
    ginv = np.linalg.inv(g.components)
    return ScalarField(g.grid, np.einsum('...sn,...sn->...', ginv, ricci))


def riemann_norm(g, J=None):
    """
    ``(||Rm||_C0, sup |nabla J|)`` for the metric ``g``.

    :param g: positive definite metric
    :param J: almost complex structure; defaults to the one compatible with
        the standard form ``w0`` and ``g``
    """
    grid = g.grid
    gv, ginv, _ = metric_arrays(g)
    R = riemann_array(gv, grid)
    lowered = np.einsum('...ar,...rsmn->...asmn', gv, R)
    rm_square = np.einsum(
        '...asmn,...st,...mu,...nv,...atuv->...',
        lowered,
        ginv,
        ginv,
        ginv,
        R,
        optimize=True,
    )
    if J is None:
        J = compatible_j_from_metric(TwoForm(grid, OMEGA_0), g)
    gamma = christoffel_array(gv, grid)
    nabla = nabla_j_array(J.components, gamma, grid)
    nj_square = np.einsum(
        '...mjl,...mn,...jk,...lq,...nkq->...', nabla, ginv, ginv, gv, nabla,
        optimize=True,
    )
    rm = float(np.sqrt(np.max(np.maximum(rm_square, 0.0))))
    nj = float(np.sqrt(np.max(np.maximum(nj_square, 0.0))))
    logger.debug('||Rm||_C0 = %.3e, sup|nabla J| = %.3e', rm, nj)
    return rm, nj


@dataclass(frozen=True)
class IdentityResiduals:
    alpha_residual: float
    beta_residual: float
    alpha_norm: float
    beta_norm: float


def alpha_beta_arrays(j, nabla, hp):
    """
    The tensors ``alpha_ijp`` and ``beta_ijp`` built from ``nabla J`` and
    ``g'``; both vanish when ``J`` is parallel.
    """
    jp = j @ hp
    alpha = (
        np.einsum('...pl,...ijl->...ijp', jp, nabla)
        - np.einsum('...pl,...jil->...ijp', jp, nabla)
        + np.einsum('...plk,...kj,...il->...ijp', nabla, hp, j, optimize=True)
        - np.einsum('...plk,...ki,...jl->...ijp', nabla, hp, j, optimize=True)
        + np.einsum('...kp,...ljk,...il->...ijp', hp, nabla, j, optimize=True)
        - np.einsum('...kp,...lik,...jl->...ijp', hp, nabla, j, optimize=True)
    )
    beta = (
        np.einsum('...kl,...jil,...pk->...ijp', hp, nabla, j, optimize=True)
        - np.einsum('...kl,...jpl,...ik->...ijp', hp, nabla, j, optimize=True)
        - np.einsum('...kj,...plk,...il->...ijp', hp, nabla, j, optimize=True)
        + np.einsum('...kj,...ilk,...pl->...ijp', hp, nabla, j, optimize=True)
        - np.einsum('...ljk,...kp,...il->...ijp', nabla, hp, j, optimize=True)
        + np.einsum('...ljk,...ki,...pl->...ijp', nabla, hp, j, optimize=True)
    )
    return alpha, beta


def lemma32_check(triple, g_prime):
    """
    Evaluate both sides of the identities

    * ``2 P^rs_ij nabla_r g'_sp - 2 P^rs_ji nabla_r g'_sp = alpha_ijp``
    * ``2 Q^rs_ij nabla_r g'_sp - 2 Q^rs_pj nabla_r g'_si = beta_ijp``

    and return the maximal pointwise residuals. The identities hold when
    ``g'`` is the metric of a closed ``J``-compatible form.

    :param triple: the background :class:`~akcy.structure.AKTriple`
    :param g_prime: metric of a second ``J``-compatible symplectic form
    """
    grid = triple.grid
    j = triple.J.components
    gamma = christoffel_array(triple.g.components, grid)
    nabla = nabla_j_array(j, gamma, grid)
    hp = g_prime.components if isinstance(g_prime, Metric) else np.asarray(g_prime)
    X = nabla_metric_array(hp, gamma, grid)
    conj = np.einsum('...ir,...js,...rsp->...ijp', j, j, X, optimize=True)
    p_side = X - conj
    q_side = X + conj
    lhs_alpha = p_side - np.swapaxes(p_side, 4, 5)
    lhs_beta = q_side - np.einsum('...pji->...ijp', q_side)
    alpha, beta = alpha_beta_arrays(j, nabla, hp)
    return IdentityResiduals(
        alpha_residual=float(np.max(np.abs(lhs_alpha - alpha))),
        beta_residual=float(np.max(np.abs(lhs_beta - beta))),
        alpha_norm=float(np.max(np.abs(alpha))),
        beta_norm=float(np.max(np.abs(beta))),
    )
