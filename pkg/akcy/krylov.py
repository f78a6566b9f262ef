"""
Matrix-free elliptic solves on the grid.

Two square systems cover every linear problem in the package:

* :class:`ScalarSystem` for ``L u + mean(u) = f`` with ``L`` a Laplacian;
* :class:`FormSystem` for a first-order operator on 1-forms bordered by
  three 2-form columns, a gauge row and the flat means of the 1-form.

Both are solved with restarted GMRES and preconditioned by the inverse of the
flat constant-coefficient symbol. Fourier modes with a Nyquist index are
removed from the unknowns: spectral first derivatives annihilate them, so
they would otherwise form a spurious kernel.
"""

import logging
import math

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from . import spectral
from .exc import LinearSolveFailure
from .forms import frame_coordinates

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAXITER = 500
DEFAULT_RESTART = 50
REFINEMENTS = 4


def _split_nyquist(a, grid):
    """Return ``(resolved, nyquist)`` parts of a grid array."""
    a_hat = spectral.forward(a)
    nyq_hat = np.zeros_like(a_hat)
    nyq_hat[grid.nyquist_mask] = a_hat[grid.nyquist_mask]
    a_hat[grid.nyquist_mask] = 0
    return spectral.backward(a_hat), spectral.backward(nyq_hat)


class _KrylovSolve:
    """Shared GMRES driver with iterative refinement on the true residual."""

    def __init__(self, tol=DEFAULT_TOLERANCE, maxiter=DEFAULT_MAXITER, restart=DEFAULT_RESTART, label=''):
        self.tol = tol
        self.maxiter = maxiter
        self.restart = restart
        self.label = label
        self.iterations = 0

    def _run(self, operator, preconditioner, rhs, strict=True):
        norm_rhs = float(np.linalg.norm(rhs))
        x = np.zeros_like(rhs)
        if norm_rhs == 0.0:
            return x, 0.0
        counter = {'n': 0}

        def count(_):
            counter['n'] += 1

        cycles = max(1, math.ceil(self.maxiter / self.restart))
        relative = math.inf
        for _ in range(REFINEMENTS):
            residual = rhs - operator.matvec(x)
            relative = float(np.linalg.norm(residual)) / norm_rhs
            if relative <= self.tol:
                break
            correction, info = gmres(
                operator,
                residual,
                rtol=min(0.5, self.tol / max(relative, self.tol)),
                atol=0.0,
                restart=self.restart,
                maxiter=cycles,
                M=preconditioner,
                callback=count,
                callback_type='pr_norm',
            )
            x = x + correction
            if info < 0:
                raise LinearSolveFailure(f'{self.label}: illegal GMRES input ({info})')
        else:
            residual = rhs - operator.matvec(x)
            relative = float(np.linalg.norm(residual)) / norm_rhs
        self.iterations = counter['n']
        logger.debug(
            '%s: %d GMRES iterations, relative residual %.3e',
            self.label,
            self.iterations,
            relative,
        )
        if strict and relative > self.tol * 10:
            raise LinearSolveFailure(
                f'{self.label}: GMRES stalled at relative residual {relative:.3e}'
            )
        return x, relative


class ScalarSystem(_KrylovSolve):
    """
    ``L u + mean(u) = f`` for a Laplacian-type ``L``. For ``f`` with zero
    weighted mean the solution has zero flat mean and solves ``L u = f``.

    :param grid: the grid
    :param operator: callable mapping a scalar array to a scalar array
    """

    def __init__(self, grid, operator, **kwargs):
        super().__init__(**kwargs)
        self.grid = grid
        self.operator = operator
        size = grid.npoints
        self._linear = LinearOperator((size, size), matvec=self._matvec, dtype=float)
        self._preconditioner = LinearOperator(
            (size, size), matvec=self._precondition, dtype=float
        )

    def _matvec(self, x):
        u = np.reshape(x, self.grid.shape)
        resolved, nyquist = _split_nyquist(u, self.grid)
        out = self.operator(resolved) + np.mean(u)
        out, _ = _split_nyquist(out, self.grid)
        return (out + nyquist).ravel()

    def _precondition(self, y):
        f = np.reshape(y, self.grid.shape)
        f_hat = spectral.forward(f)
        symbol = self.grid.laplacian_symbol.copy()
        symbol[self.grid.nyquist_mask] = 1.0
        symbol[(0, 0, 0, 0)] = 1.0
        u_hat = f_hat / symbol
        u_hat[(0, 0, 0, 0)] = f_hat[(0, 0, 0, 0)]
        return spectral.backward(u_hat).ravel()

    def solve(self, rhs, strict=True):
        rhs, dropped = _split_nyquist(np.asarray(rhs, dtype=float), self.grid)
        if np.any(dropped):
            logger.debug('%s: dropped Nyquist content %.3e', self.label, np.max(np.abs(dropped)))
        x, self.relative_residual = self._run(
            self._linear, self._preconditioner, rhs.ravel(), strict
        )
        return np.reshape(x, self.grid.shape)


class FormSystem(_KrylovSolve):
    """
    Square bordered system for a 1-form ``beta``, three multipliers ``xi``
    and a scalar ``mu``::

        coords(A(beta) + sum_k xi_k V_k) = c
        gauge(beta) + mu                 = h
        mean(beta)                       = m

    ``coords`` are pointwise coordinates against a constant orthonormal
    frame of three 2-forms (self-dual or anti-self-dual for the flat metric).

    :param grid: the grid
    :param operator: callable, 1-form array -> 2-form array
    :param gauge: callable, 1-form array -> scalar array
    :param frame: constant frame, array of shape ``(3, 4, 4)``
    :param columns: three 2-form arrays ``V_k``
    """

    def __init__(self, grid, operator, gauge, frame, columns, **kwargs):
        super().__init__(**kwargs)
        if len(columns) != 3:
            raise ValueError('the bordered system needs exactly three columns')
        self.grid = grid
        self.operator = operator
        self.gauge = gauge
        self.frame = frame
        self.columns = [np.asarray(column, dtype=float) for column in columns]
        self.column_coordinates = np.stack(
            [frame_coordinates(column, frame) for column in self.columns], axis=-1
        )
        self.mean_matrix = self.column_coordinates.mean(axis=(0, 1, 2, 3))
        self.npoints = grid.npoints
        size = 4 * self.npoints + 4
        self._linear = LinearOperator((size, size), matvec=self._matvec, dtype=float)
        self._preconditioner = LinearOperator(
            (size, size), matvec=self._precondition, dtype=float
        )
        self._inverse_symbol = self._build_inverse_symbol()

    def _build_inverse_symbol(self):
        grid = self.grid
        waves = np.stack(
            np.broadcast_arrays(*grid.derivative_wavenumbers), axis=-1
        )
        symbol = np.zeros(grid.shape + (4, 4), dtype=complex)
        symbol[..., :3, :] = 1j * np.einsum('...i,aij->...aj', waves, self.frame)
        symbol[..., 3, :] = -1j * waves
        singular = grid.nyquist_mask.copy()
        singular[(0, 0, 0, 0)] = True
        symbol[singular] = np.eye(4)
        inverse = np.linalg.inv(symbol)
        inverse[singular] = 0
        return inverse

    def unpack(self, x):
        n = self.npoints
        beta = np.reshape(x[: 4 * n], self.grid.shape + (4,))
        return beta, x[4 * n : 4 * n + 3], x[4 * n + 3]

    def pack_rows(self, coords, gauge, means):
        return np.concatenate([coords.ravel(), np.ravel(gauge), np.ravel(means)])

    def _unpack_rows(self, y):
        n = self.npoints
        coords = np.reshape(y[: 3 * n], self.grid.shape + (3,))
        gauge = np.reshape(y[3 * n : 4 * n], self.grid.shape)
        return coords, gauge, y[4 * n :]

    def _matvec(self, x):
        beta, xi, mu = self.unpack(np.ravel(x))
        resolved, nyquist = _split_nyquist(beta, self.grid)
        form = self.operator(resolved)
        for weight, column in zip(xi, self.columns):
            form = form + weight * column
        rows = np.concatenate(
            [
                frame_coordinates(form, self.frame),
                (self.gauge(resolved) + mu)[..., None],
            ],
            axis=-1,
        )
        rows, _ = _split_nyquist(rows, self.grid)
        rows = rows + nyquist
        return self.pack_rows(rows[..., :3], rows[..., 3], beta.mean(axis=(0, 1, 2, 3)))

    def _precondition(self, y):
        coords, gauge, means = self._unpack_rows(np.ravel(y))
        xi = np.linalg.lstsq(self.mean_matrix, coords.mean(axis=(0, 1, 2, 3)), rcond=None)[0]
        mu = float(np.mean(gauge))
        rows = np.concatenate(
            [coords - self.column_coordinates @ xi, (gauge - mu)[..., None]], axis=-1
        )
        rows_hat = spectral.forward(rows)
        beta_hat = np.einsum('...ij,...j->...i', self._inverse_symbol, rows_hat)
        beta_hat[self.grid.nyquist_mask] = rows_hat[self.grid.nyquist_mask]
        beta_hat[(0, 0, 0, 0)] = np.asarray(means) * self.npoints
        beta = spectral.backward(beta_hat)
        return np.concatenate([beta.ravel(), xi, [mu]])

    def solve_vector(self, rhs, strict=True):
        """Solve for a packed right-hand side whose rows carry no Nyquist content."""
        x, self.relative_residual = self._run(
            self._linear, self._preconditioner, rhs, strict
        )
        return x

    def solve(self, coords, gauge=None, means=None, strict=True):
        """
        Solve the bordered system.

        :param coords: right-hand side frame coordinates, shape ``(*n, 3)``
        :param gauge: right-hand side of the gauge row (default zero)
        :param means: prescribed flat means of ``beta`` (default zero)
        :return: ``(beta, xi, mu)``
        """
        if gauge is None:
            gauge = np.zeros(self.grid.shape)
        if means is None:
            means = np.zeros(4)
        rows = np.concatenate([np.asarray(coords, float), np.asarray(gauge, float)[..., None]], axis=-1)
        rows, dropped = _split_nyquist(rows, self.grid)
        if np.any(dropped):
            logger.debug('%s: dropped Nyquist content %.3e', self.label, np.max(np.abs(dropped)))
        rhs = self.pack_rows(rows[..., :3], rows[..., 3], means)
        return self.unpack(self.solve_vector(rhs, strict))
