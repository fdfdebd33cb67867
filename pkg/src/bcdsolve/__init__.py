"""Solvers for ill-posed linear inverse problems with block tensor structure.

The package provides block coordinate descent with a loping skip rule
and cycle-based stopping, a Landweber baseline, the tensor-product
operator machinery both methods rely on, a system-of-integral-equations
benchmark, and a desk-scale multi-spectral X-ray CT model.
"""

from .blocks import inner, lift, lift_adjoint, lifted_norm, norm
from .operators import (
    ConvergenceWarning,
    CountingOperator,
    IdentityOperator,
    IntegrationOperator,
    LinearOperator,
    MatrixOperator,
    TensorProductOperator,
    operator_norm,
    project_block,
    project_column,
)
from .solvers import (
    AdaptiveStep,
    ConstantStep,
    Control,
    DivergenceError,
    Landweber,
    LopingBCD,
    SolverState,
    StopRule,
    adaptive_step_size,
    bcd_step,
    block_residual,
    landweber_step,
    loping_flag,
    run_landweber,
    run_loping_bcd,
    validate_control,
)
from .trace import RunTrace, emit_csv, read_csv

__version__ = "0.1.0"

__all__ = [
    "AdaptiveStep",
    "ConstantStep",
    "Control",
    "ConvergenceWarning",
    "CountingOperator",
    "DivergenceError",
    "IdentityOperator",
    "IntegrationOperator",
    "Landweber",
    "LinearOperator",
    "LopingBCD",
    "MatrixOperator",
    "RunTrace",
    "SolverState",
    "StopRule",
    "TensorProductOperator",
    "adaptive_step_size",
    "bcd_step",
    "block_residual",
    "emit_csv",
    "inner",
    "landweber_step",
    "lift",
    "lift_adjoint",
    "lifted_norm",
    "loping_flag",
    "norm",
    "operator_norm",
    "project_block",
    "project_column",
    "read_csv",
    "run_landweber",
    "run_loping_bcd",
    "validate_control",
]
