"""Per-step monitoring of a candidate solution ``w'``."""

import logging
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import spectral
from .connection import nijenhuis
from .fields import Metric
from .forms import exterior_derivative, wedge
from .harmonic import class_representatives
from .krylov import DEFAULT_TOLERANCE
from .potentials import class_coefficients, decompose, potentials
from .structure import metric_array

logger = logging.getLogger(__name__)

EXACT_KAHLER_OSCILLATION = 1e-12

CSV_COLUMNS = (
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


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    osc_phi1: float
    osc_phi_half: float
    tr_min: float
    tr_max: float
    trp_min: float
    trp_max: float
    lower_bound: float
    lower_bound_margin: float
    trace_identity_residual: float
    claim_quantity: float
    class_term_Lp: float
    nij_L1: float
    nij_Lp: float
    nij_C0: float
    s: tuple
    fitted_A: float
    exact_kahler: bool
    max_principle_tr: float
    min_eig_gprime: float
    newton_iters: int = 0
    res_volume: float = 0.0
    res_selfdual: float = 0.0
    res_gauge: float = 0.0
    c_hat: float = 0.0
    extra: dict = field(default_factory=dict)

    def as_row(self):
        """Values in :data:`CSV_COLUMNS` order; ``fitted_A`` is empty when exact-Kähler."""
        values = {
            **{name: getattr(self, name) for name in CSV_COLUMNS if hasattr(self, name)},
            's0': self.s[0],
            's1': self.s[1],
            's2': self.s[2],
        }
        if self.exact_kahler:
            values['fitted_A'] = ''
        return [values[name] for name in CSV_COLUMNS]

    def as_dict(self):
        result = asdict(self)
        result['s'] = list(self.s)
        return result

    def is_finite(self):
        numbers = [
            value
            for key, value in self.as_dict().items()
            if isinstance(value, float) and not (key == 'fitted_A' and self.exact_kahler)
        ]
        return all(math.isfinite(value) for value in numbers + list(self.s))


def _lp_norm(values, density, p, grid):
    """``(integral |f|^p dmu)^(1/p)`` for the probability measure ``dmu ∝ density``."""
    total = spectral.integral(density, grid)
    return spectral.integral(np.abs(values) ** p * density, grid) ** (1.0 / p) / total ** (
        1.0 / p
    )


def _traces(g, g_prime):
    tr = np.einsum('...ij,...ij->...', np.linalg.inv(g), g_prime)
    tr_prime = np.einsum('...ij,...ij->...', np.linalg.inv(g_prime), g)
    return tr, tr_prime


def diagnostics(
    triple,
    omega_prime,
    F,
    p=4.0,
    t=1.0,
    state=None,
    classes=None,
    mode='drifting',
    tol=DEFAULT_TOLERANCE,
):
    """
    Fill a :class:`DiagnosticsRecord` for ``w'`` against the triple.

    :param triple: background :class:`~akcy.structure.AKTriple`
    :param omega_prime: candidate solution, ``J``-compatible and positive
    :param F: normalized volume function
    :param p: exponent of the claim quantities
    :param t: continuation parameter; the volume function at ``t`` is
        ``tF + c_t``
    :param state: optional :class:`~akcy.solver.SolverState` whose solver
        residuals and iteration count are copied into the record
    :param classes: ``[w, chi_1, chi_2]`` of the background metric
    :param mode: potential normalization, ``'drifting'`` or ``'fixed'``
    """
    grid = triple.grid
    w = triple.omega.components
    wp = omega_prime.components
    j = triple.J.components
    g = triple.g.components
    g_prime = metric_array(wp, j)
    g_prime = 0.5 * (g_prime + np.swapaxes(g_prime, -1, -2))
    density = wedge(w, w)

    c_t = math.log(spectral.integral(density, grid)) - spectral.log_integral(
        t * F.components, density, grid
    )
    F_t = t * F.components + c_t

    tr, tr_prime = _traces(g, g_prime)
    lower_bound = 4 * math.exp(float(np.min(F_t)) / 2)

    if classes is None and mode == 'drifting':
        classes = class_representatives(triple.omega, triple.J, tol=tol)
    phi_half = potentials(triple.omega, omega_prime, triple.J, 0.5, mode=mode, tol=tol)
    decomposition = decompose(
        triple.omega, omega_prime, triple.J, 1.0, mode=mode, classes=classes, tol=tol
    )
    phi_1 = decomposition.phi
    osc = phi_1.oscillation()

    da = exterior_derivative(decomposition.a.components, grid)
    claim = _lp_norm(wedge(da, w) / density, density, p, grid)
    if state is not None:
        s = tuple(float(v) for v in state.s)
    elif classes is not None:
        s = tuple(float(v) for v in class_coefficients(w, wp, classes))
    else:
        s = (0.0, 0.0, 0.0)
    if classes is not None:
        class_term = sum(coefficient * chi for coefficient, chi in zip(s, classes))
        class_Lp = _lp_norm(wedge(class_term, w) / density, density, p, grid)
    else:
        class_Lp = 0.0

    norms = nijenhuis(triple.J).norms(Metric(grid, g), p=p)

    exact = osc <= EXACT_KAHLER_OSCILLATION
    fitted = math.nan if exact else math.log(float(np.max(tr)) / float(np.min(tr))) / osc
    slope = 0.0 if exact else fitted
    quantity = np.log(tr) - slope * phi_1.components
    at_max = np.unravel_index(np.argmax(quantity), grid.shape)

    record = DiagnosticsRecord(
        t=float(t),
        osc_phi1=osc,
        osc_phi_half=phi_half.oscillation(),
        tr_min=float(np.min(tr)),
        tr_max=float(np.max(tr)),
        trp_min=float(np.min(tr_prime)),
        trp_max=float(np.max(tr_prime)),
        lower_bound=lower_bound,
        lower_bound_margin=float(np.min(tr)) - lower_bound,
        trace_identity_residual=float(np.max(np.abs(tr - np.exp(F_t) * tr_prime))),
        claim_quantity=claim,
        class_term_Lp=class_Lp,
        nij_L1=norms.l1,
        nij_Lp=norms.lp,
        nij_C0=norms.c0,
        s=s,
        fitted_A=fitted,
        exact_kahler=exact,
        max_principle_tr=float(tr_prime[at_max]),
        min_eig_gprime=float(np.min(np.linalg.eigvalsh(g_prime))),
    )
    if state is not None:
        record = _with_state(record, state)
    logger.debug(
        't=%.6g: osc phi1 %.3e, claim %.3e, trace identity %.3e',
        t,
        record.osc_phi1,
        record.claim_quantity,
        record.trace_identity_residual,
    )
    return record


def _with_state(record, state):
    return replace(
        record,
        newton_iters=state.newton_iters,
        res_volume=state.residuals.volume,
        res_selfdual=state.residuals.selfdual,
        res_gauge=state.residuals.gauge,
        c_hat=state.c_hat,
    )
