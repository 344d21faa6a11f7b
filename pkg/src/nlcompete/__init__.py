"""Two-species competition with nonsymmetric nonlocal dispersal.

Discrete operators, invasion indicators, steady-state solvers, explicit
dynamics, and the sign-based phase classification with its simulation
verifier.
"""

from .grid import (
    Field,
    Grid,
    GridMismatchError,
    StatePair,
    build_grid,
    competitive_leq,
    integrate,
)
from .kernels import DispersalOperator, KernelSpec, apply, assemble, eval_kernel
from .reaction import (
    AuditReport,
    LotkaVolterraParams,
    NonBracketingError,
    ReactionModel,
    F_plus,
    audit_assumptions,
    composite_decrement,
    g_composite,
    lv_model,
    solve_F,
)
from .spectral import (
    IndicatorSet,
    SpectralConvergenceError,
    SpectralResult,
    cw_bounds,
    indicators,
    small_d_limit_check,
    spectral_bound,
)
from .steady import (
    AsymptoticCertificate,
    LimitSystemResult,
    PairResult,
    SandwichCertificate,
    SteadyResult,
    SteadySolveError,
    asymptotic_sandwich,
    check_comparison,
    monotone_iterate_V,
    solve_pair,
    solve_single,
    theta_sandwich,
)
from .dynamics import (
    Outcome,
    SimConfig,
    SimResult,
    dt_bound,
    order_preservation_check,
    simulate,
    step,
)
from .classify import (
    ClassificationReport,
    HypothesisError,
    Prediction,
    Scenario,
    SweepCell,
    classify,
    prepare,
    sweep,
    verify,
)

__version__ = "0.1.0"
