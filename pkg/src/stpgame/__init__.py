"""Semi-tensor product algebra, Boolean control networks, LQ games and
discrete-time H-infinity computations."""
from .errors import (
    ConvergenceError,
    DimensionError,
    SchemaError,
    SingularFactorError,
    SizeCapExceeded,
    StpGameError,
)
from .stp import DeltaVector, LogicalMatrix, TruthTable, delta, densify, logical_matrix, stp, stp_chain
from .boolnet import BooleanNetwork
from .lqr import LqrProblem, solve_kernel
from .games import LqGame, lq_nash_solve
from .hinf import HinfPlant, gamma_report, gamma_threshold, solve_inverse_form
from .bundled import bundled_examples

__version__ = "0.1.0"
