import math

import numpy as np

from akcy import diagnostics
from akcy.diagnostics import CSV_COLUMNS
from tests import PerturbedTestCase, TestCase


class TestIdenticalForms(TestCase):
    def setup_method(self, method):
        super().setup_method(method)
        self.record = diagnostics(self.triple, self.triple.omega, self.F)

    def test_traces(self):
        assert abs(self.record.tr_min - 4) < 1e-12
        assert abs(self.record.tr_max - 4) < 1e-12
        assert abs(self.record.trp_min - 4) < 1e-12
        assert self.record.trace_identity_residual < 1e-12
        assert abs(self.record.lower_bound - 4) < 1e-12
        assert self.record.lower_bound_margin > -1e-12
        assert abs(self.record.min_eig_gprime - 1) < 1e-12

    def test_potentials_vanish(self):
        assert self.record.osc_phi1 == 0.0
        assert self.record.osc_phi_half == 0.0
        assert self.record.claim_quantity == 0.0
        assert self.record.exact_kahler
        assert math.isnan(self.record.fitted_A)

    def test_class_coefficients(self):
        assert np.allclose(self.record.s, 0.0, atol=1e-14)
        assert self.record.class_term_Lp < 1e-14

    def test_flat_structure_is_integrable(self):
        assert self.record.nij_L1 < 1e-12
        assert self.record.nij_C0 < 1e-12

    def test_row(self):
        row = self.record.as_row()
        assert len(row) == len(CSV_COLUMNS)
        assert row[CSV_COLUMNS.index('fitted_A')] == ''
        assert row[CSV_COLUMNS.index('tr_max')] == self.record.tr_max
        assert self.record.is_finite()

    def test_as_dict(self):
        values = self.record.as_dict()
        assert isinstance(values['s'], list)
        assert values['exact_kahler'] is True


class TestCsvColumns:
    def test_order(self):
        assert CSV_COLUMNS == (
            't',
            'newton_iters',
            'res_volume',
            'res_selfdual',
            'res_gauge',
            'min_eig_gprime',
            'osc_phi1',
            'osc_phi_half',
            'tr_min',
            'tr_max',
            'claim_quantity',
            'class_term_Lp',
            'nij_L1',
            'nij_Lp',
            's0',
            's1',
            's2',
            'c_hat',
            'fitted_A',
        )


class TestPerturbedBackground(PerturbedTestCase):
    def test_nijenhuis_norms_are_recorded(self):
        record = diagnostics(self.triple, self.triple.omega, self.F)
        assert record.nij_C0 > 0
        assert record.nij_L1 <= record.nij_Lp <= record.nij_C0
        assert abs(record.tr_max - 4) < 1e-10
