from .config import RunConfig as RunConfig
from .config import load_config as load_config
from .config import parse_config as parse_config
from .continuity import ContinuationPath as ContinuationPath
from .continuity import continuity_path as continuity_path
from .continuity import uniqueness_test as uniqueness_test
from .diagnostics import DiagnosticsRecord as DiagnosticsRecord
from .diagnostics import diagnostics as diagnostics
from .exc import AkcyError as AkcyError
from .fields import ACStructure as ACStructure
from .fields import Metric as Metric
from .fields import OneForm as OneForm
from .fields import ScalarField as ScalarField
from .fields import TensorField as TensorField
from .fields import TwoForm as TwoForm
from .grid import Grid4 as Grid4
from .harmonic import HarmonicBasis as HarmonicBasis
from .harmonic import harmonic_self_dual_basis as harmonic_self_dual_basis
from .manager import ContinuationManager as ContinuationManager
from .potentials import decompose as decompose
from .potentials import potentials as potentials
from .scenario import build_scenario as build_scenario
from .solver import SolverConfig as SolverConfig
from .solver import SolverState as SolverState
from .solver import newton_solve_at_t as newton_solve_at_t
from .solver import normalize_F as normalize_F
from .solver import phi_map as phi_map
from .structure import AKTriple as AKTriple
from .structure import Projectors as Projectors

__version__ = '0.1.0'


continuation_manager = ContinuationManager()
