import numpy as np
from pytest import mark, raises

from akcy import (
    ACStructure,
    AKTriple,
    ContinuationManager,
    Grid4,
    Metric,
    SolverConfig,
    continuity_path,
    normalize_F,
)
from akcy.config import ScenarioSpec
from akcy.connection import (
    christoffel,
    j_divergence,
    lemma32_check,
    nijenhuis,
    nijenhuis_ak_form,
    riemann,
    riemann_norm,
    scalar_curvature,
)
from akcy.exc import NotAlmostKahler
from akcy.forms import OMEGA_0
from akcy.potentials import ddc_array
from akcy.scenario import build_triple, forcing_field
from akcy.structure import J_0, metric_array
from akcy.suites import run_suites
from tests import PerturbedTestCase, sine_forcing


def perturbed_triple(grid, epsilon, seed=3):
    return build_triple(grid, ScenarioSpec('perturbed', epsilon, seed, (0, 1)))


def kahler_potential(grid):
    x1, x2, _, _ = grid.coordinates
    return 0.02 * np.sin(2 * np.pi * x1) * np.cos(2 * np.pi * x2) / (2 * np.pi) ** 2


class TestNijenhuis:
    def test_standard_structure_is_integrable(self):
        J = ACStructure(Grid4((4, 4, 4, 4)), J_0)
        assert nijenhuis(J).max_abs() < 1e-12

    def test_constant_structure_is_integrable(self):
        rng = np.random.default_rng(0)
        A = np.eye(4) + 0.1 * rng.standard_normal((4, 4))
        J = ACStructure(Grid4((4, 4, 4, 4)), A @ J_0 @ np.linalg.inv(A))
        assert J.square_defect() < 1e-12
        assert nijenhuis(J).max_abs() < 1e-12

    def test_coordinate_and_connection_forms_agree(self):
        triple = perturbed_triple(Grid4((16, 16, 4, 4)), 1e-2)
        coordinate = nijenhuis(triple.J).components
        connection = nijenhuis_ak_form(triple.J, triple.g).components
        assert np.max(np.abs(coordinate)) > 1e-4
        assert np.max(np.abs(coordinate - connection)) < 1e-6 * np.max(np.abs(coordinate))

    def test_linear_in_epsilon(self):
        grid = Grid4((16, 16, 4, 4))
        norms = [
            nijenhuis(triple.J).norms(triple.g).c0
            for triple in (perturbed_triple(grid, 1e-2), perturbed_triple(grid, 5e-3))
        ]
        assert 1.6 < norms[0] / norms[1] < 2.4

    def test_norms(self):
        triple = perturbed_triple(Grid4((8, 8, 4, 4)), 1e-2)
        norms = nijenhuis(triple.J).norms(triple.g, p=4)
        assert norms.p == 4
        assert 0 < norms.l1 <= norms.lp <= norms.c0

    def test_connection_form_needs_closed_form(self):
        grid = Grid4((8, 4, 4, 4))
        u = 0.05 * np.sin(2 * np.pi * grid.coordinates[0])
        g = Metric(grid, np.exp(2 * u)[..., None, None] * np.eye(4))
        with raises(NotAlmostKahler):
            nijenhuis_ak_form(ACStructure(grid, J_0), g)


class TestDivergence(PerturbedTestCase):
    def test_j_is_divergence_free(self):
        assert j_divergence(self.triple.J, self.triple.g).max_abs() < 1e-6


class TestCurvature:
    def test_flat(self):
        grid = Grid4((4, 4, 4, 4))
        rm, nabla_j = riemann_norm(Metric(grid, np.eye(4)))
        assert rm < 1e-12
        assert nabla_j < 1e-12

    def test_conformally_flat_scalar_curvature(self):
        grid = Grid4((16, 4, 4, 4))
        x1 = grid.coordinates[0]
        k = 2 * np.pi
        u = 0.05 * np.sin(k * x1)
        laplacian_u = -(k**2) * u
        gradient_square = (0.05 * k * np.cos(k * x1)) ** 2
        expected = -np.exp(-2 * u) * (6 * laplacian_u + 6 * gradient_square)
        g = Metric(grid, np.exp(2 * u)[..., None, None] * np.eye(4))
        assert np.max(np.abs(scalar_curvature(g).components - expected)) < 1e-6

    def test_conformally_flat_christoffel_symbols(self):
        grid = Grid4((16, 4, 4, 4))
        x1 = grid.coordinates[0]
        u = 0.05 * np.sin(2 * np.pi * x1)
        du = 0.05 * 2 * np.pi * np.cos(2 * np.pi * x1)
        gamma = christoffel(Metric(grid, np.exp(2 * u)[..., None, None] * np.eye(4)))
        assert gamma.variance == 'udd'
        expected = np.zeros(grid.shape + (4, 4, 4))
        expected[..., 0, 0, 0] = du
        for j in (1, 2, 3):
            expected[..., 0, j, j] = -du
            expected[..., j, 0, j] = du
            expected[..., j, j, 0] = du
        assert np.max(np.abs(gamma.components - expected)) < 1e-10

    def test_riemann_symmetries(self):
        grid = Grid4((16, 16, 4, 4))
        x1, x2, _, _ = grid.coordinates
        u = 0.05 * np.sin(2 * np.pi * x1) * np.cos(2 * np.pi * x2)
        g = Metric(grid, np.exp(2 * u)[..., None, None] * np.eye(4))
        R = riemann(g).components
        assert np.max(np.abs(R)) > 1e-2
        lowered = np.einsum('...rk,...ksmn->...rsmn', g.components, R)
        assert np.max(np.abs(R + np.swapaxes(R, -1, -2))) < 1e-12
        assert np.max(np.abs(lowered + np.swapaxes(lowered, -3, -4))) < 1e-8
        bianchi = R + np.einsum('...rsmn->...rmns', R) + np.einsum('...rsmn->...rnsm', R)
        assert np.max(np.abs(bianchi)) < 1e-8

    def test_perturbed_metric_is_curved(self):
        triple = perturbed_triple(Grid4((8, 8, 4, 4)), 1e-2)
        rm, nabla_j = riemann_norm(triple.g, triple.J)
        assert rm > 0
        assert nabla_j > 0


class TestConnectionIdentities:
    def test_kahler_potential_form(self):
        grid = Grid4((8, 8, 4, 4))
        triple = AKTriple.standard(grid)
        omega_prime = OMEGA_0 - 0.5 * ddc_array(J_0, kahler_potential(grid), grid)
        g_prime = metric_array(omega_prime, triple.J.components)
        g_prime = Metric(grid, 0.5 * (g_prime + np.swapaxes(g_prime, -1, -2)))
        residuals = lemma32_check(triple, g_prime)
        assert residuals.alpha_residual < 1e-10
        assert residuals.beta_residual < 1e-10
        assert residuals.alpha_norm < 1e-12
        assert residuals.beta_norm < 1e-12

    def test_same_metric_on_perturbed_triple(self):
        triple = perturbed_triple(Grid4((8, 8, 4, 4)), 1e-2)
        residuals = lemma32_check(triple, triple.g)
        assert residuals.alpha_residual < 1e-6
        assert residuals.beta_residual < 1e-6

    def test_accepts_plain_array(self):
        triple = AKTriple.standard(Grid4((4, 4, 4, 4)))
        residuals = lemma32_check(triple, triple.g.components)
        assert residuals.alpha_residual < 1e-12


def solved_metric(triple, F, config):
    manager = ContinuationManager(options={'record_diagnostics': False, 'initial_record': False})
    state, _ = continuity_path(triple, F, config, manager=manager)
    return state.metric(triple.J)


@mark.slow
class TestSolvedFormIdentities(PerturbedTestCase):
    n = (16, 16, 4, 4)
    forcing = sine_forcing()

    def setup_method(self, method):
        super().setup_method(method)
        self.g_prime = solved_metric(self.triple, self.F, SolverConfig())
        self.residuals = lemma32_check(self.triple, self.g_prime)

    def test_solution_is_a_different_metric(self):
        assert np.max(np.abs(self.g_prime.components - self.triple.g.components)) > 1e-3

    def test_identities_hold(self):
        assert self.residuals.alpha_norm > 1e-5
        assert self.residuals.alpha_residual < 1e-9
        assert self.residuals.beta_residual < 1e-9

    def test_residuals_shrink_under_refinement(self):
        grid = Grid4((8, 8, 4, 4))
        triple = perturbed_triple(grid, self.epsilon, self.seed)
        F = normalize_F(forcing_field(grid, self.config.forcing), triple.omega)
        coarse = lemma32_check(triple, solved_metric(triple, F, SolverConfig(volume_tol=1e-6)))
        assert max(coarse.alpha_residual, coarse.beta_residual) > max(
            self.residuals.alpha_residual, self.residuals.beta_residual
        )
        assert coarse.alpha_residual < 1e-4
        assert coarse.beta_residual < 1e-4

    def test_suite_passes(self):
        criteria = run_suites(self.config, self.triple, names=['lemma32'])
        assert [criterion.name for criterion in criteria if not criterion.passed] == []
        assert 'identities for solved w\' converge under refinement' in [
            criterion.name for criterion in criteria
        ]
