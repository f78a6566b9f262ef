import numpy as np

from akcy import harmonic_self_dual_basis
from akcy.forms import exterior_derivative, hodge_star_array
from akcy.harmonic import class_representatives, pairing_matrix
from tests import PerturbedTestCase, TestCase


class TestFlatHarmonicBasis(TestCase):
    def test_flat_basis_is_constant_and_orthonormal(self):
        basis = harmonic_self_dual_basis(self.triple.g)
        assert len(basis) == 3
        assert np.allclose(basis.gram(), np.eye(3), atol=1e-12)
        for chi in basis.arrays():
            assert np.max(np.abs(chi - chi[0, 0, 0, 0])) < 1e-12

    def test_representatives_start_with_omega(self):
        classes = class_representatives(self.triple.omega, self.triple.J)
        assert len(classes) == 3
        assert np.array_equal(classes[0], self.triple.omega.components)


class TestPerturbedHarmonicBasis(PerturbedTestCase):
    def setup_method(self, method):
        super().setup_method(method)
        self.basis = harmonic_self_dual_basis(self.triple.g)

    def test_orthonormal(self):
        assert np.allclose(self.basis.gram(), np.eye(3), atol=1e-10)

    def test_closed_and_self_dual(self):
        g = self.triple.g.components
        for chi in self.basis.arrays():
            assert np.max(np.abs(exterior_derivative(chi, self.grid))) < 1e-5
            assert np.max(np.abs(hodge_star_array(chi, g) - chi)) < 1e-5
        assert np.all(self.basis.rayleigh_quotients() < 1e-12)

    def test_complement_of_omega(self):
        chi_1, chi_2 = self.basis.complement(self.triple.omega)
        pairing = pairing_matrix(
            [chi_1.components, chi_2.components],
            [chi_1.components, chi_2.components],
            self.grid,
        )
        assert np.allclose(pairing, np.eye(2), atol=1e-8)
        omega_pairing = pairing_matrix([self.triple.omega.components], [chi_1.components], self.grid)
        assert abs(omega_pairing[0, 0]) < 1e-8
