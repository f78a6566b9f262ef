import numpy as np
from pytest import raises

from akcy import ACStructure, Grid4, Metric, OneForm, ScalarField, TwoForm
from akcy.exc import InvalidField
from akcy.forms import OMEGA_0, basis_form
from tests import PerturbedTestCase


class TestTensorField:
    def setup_method(self, method):
        self.grid = Grid4((4, 4, 4, 4))

    def test_constant_broadcasts_over_grid(self):
        form = TwoForm(self.grid, OMEGA_0)
        assert form.components.shape == (4, 4, 4, 4, 4, 4)
        assert np.all(form.components[1, 2, 3, 0] == OMEGA_0)

    def test_components_are_read_only(self):
        field = ScalarField(self.grid, 1.0)
        assert not field.components.flags.writeable
        with raises(ValueError):
            field.components[0, 0, 0, 0] = 2.0

    def test_components_are_copied(self):
        values = np.zeros(self.grid.shape)
        field = ScalarField(self.grid, values)
        values[0, 0, 0, 0] = 1.0
        assert field.max_abs() == 0.0

    def test_non_finite_values(self):
        values = np.zeros(self.grid.shape)
        values[0, 1, 2, 3] = np.nan
        with raises(InvalidField):
            ScalarField(self.grid, values)

    def test_wrong_rank(self):
        with raises(InvalidField):
            OneForm(self.grid, OMEGA_0)

    def test_wrong_grid_shape(self):
        with raises(InvalidField):
            ScalarField(self.grid, np.zeros((4, 4, 4, 6)))

    def test_invalid_variance(self):
        with raises(InvalidField):
            TwoForm(self.grid, OMEGA_0, variance='dx')

    def test_two_form_must_be_antisymmetric(self):
        with raises(InvalidField):
            TwoForm(self.grid, np.eye(4))

    def test_metric_must_be_symmetric(self):
        with raises(InvalidField):
            Metric(self.grid, np.eye(4) + basis_form(0, 1))

    def test_flat_components(self):
        form = TwoForm(self.grid, OMEGA_0)
        assert form.flat_components.shape == (4, 4, 4, 4, 16)
        assert form.flat_components[0, 0, 0, 0, 2] == 1.0

    def test_arithmetic(self):
        f = ScalarField(self.grid, 2.0)
        form = TwoForm(self.grid, OMEGA_0)
        assert isinstance(form + form, TwoForm)
        assert np.allclose((form * f).components, 2 * form.components)
        assert np.allclose((3.0 * form - form).components, 2 * form.components)
        assert np.allclose((1.0 - f).components, -1.0)
        assert np.allclose((-form / f).components, -0.5 * form.components)

    def test_different_grids(self):
        other = Grid4((4, 4, 4, 6))
        with raises(InvalidField):
            ScalarField(self.grid, 1.0) + ScalarField(other, 1.0)


class TestMetricAndStructure:
    def setup_method(self, method):
        self.grid = Grid4((4, 4, 4, 4))

    def test_identity_metric(self):
        g = Metric(self.grid, np.eye(4))
        assert g.min_eigenvalue() == 1.0
        assert np.allclose(g.sqrt_det, 1.0)
        assert np.allclose(g.inverse, np.eye(4))

    def test_scalar_field_statistics(self):
        x1 = self.grid.coordinates[0]
        f = ScalarField(self.grid, x1)
        assert f.oscillation() == 0.75
        assert f.mean() == 0.375

    def test_standard_structure_squares_to_minus_one(self):
        J = ACStructure(self.grid, OMEGA_0)
        assert J.variance == 'du'
        assert J.square_defect() == 0.0

    def test_square_defect(self):
        assert ACStructure(self.grid, np.eye(4)).square_defect() == 2.0


class TestIndexMoves(PerturbedTestCase):
    def setup_method(self, method):
        super().setup_method(method)
        self.g = self.triple.g

    def test_raising_metric_gives_identity(self):
        mixed = self.g.raise_index(self.g)
        assert mixed.variance == 'ud'
        assert np.max(np.abs(mixed.components - np.eye(4))) < 1e-12

    def test_lowering_structure_gives_symplectic_form(self):
        lowered = self.g.lower_index(self.triple.J, slot=1)
        assert lowered.variance == 'dd'
        assert np.max(np.abs(lowered.components - self.triple.omega.components)) < 1e-8

    def test_lower_undoes_raise(self):
        a = OneForm(self.grid, self.band_limited(4))
        vector = self.g.raise_index(a)
        assert vector.variance == 'u'
        assert np.max(np.abs(self.g.lower_index(vector).components - a.components)) < 1e-12

    def test_slot_must_have_matching_variance(self):
        with raises(InvalidField):
            self.g.raise_index(self.triple.J, slot=1)
        with raises(InvalidField):
            self.g.lower_index(self.triple.J, slot=0)
        with raises(InvalidField):
            self.g.raise_index(self.triple.J, slot=2)

    def test_grids_must_match(self):
        with raises(InvalidField):
            self.g.raise_index(OneForm(Grid4((4, 4, 4, 4)), np.ones(4)))
