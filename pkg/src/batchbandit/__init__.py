"""Minimax and Bayesian strategies for the Gaussian two-armed bandit under
batch processing: exact backward recursion, diffusion limit, worst-case
prior search, strategy evaluation and Monte-Carlo validation."""

from .core import (
    ConfigurationError,
    DimensionalParams,
    DimensionalState,
    InternalError,
    InvariantState,
    SymmetricPrior,
    UGrid,
    from_invariant,
    loss_profile,
    one_step_loss,
    to_invariant,
    transition_variance,
)
from .dp import (
    DimensionalSolution,
    DpConfig,
    SolveOutput,
    StrategyTable,
    ValueTable,
    assemble_bayes_risk,
    extract_strategy,
    solve_dimensional,
    solve_invariant,
)
from .pde import PdeConfig, PdeSolution, solve_pde
from .search import (
    MultiAtomResult,
    RefineResult,
    SaddleReport,
    ScanCurve,
    ScanPoint,
    golden_section_max,
    refine,
    saddle_check,
    scan,
    search_multi_atom,
)
from .simulate import (
    BatchTrialConfig,
    TrialResult,
    simulate_bernoulli,
    simulate_gaussian,
)
from .strategy_eval import EvalResult, EvalStrategy, RiskCurveRow, evaluate, risk_curve
from .strategy_io import (
    STRATEGY_FORMAT_VERSION,
    StrategyFormatError,
    load_strategy,
    save_strategy,
)

__version__ = "0.1.0"

__all__ = [
    "BatchTrialConfig",
    "ConfigurationError",
    "DimensionalParams",
    "DimensionalSolution",
    "DimensionalState",
    "DpConfig",
    "EvalResult",
    "EvalStrategy",
    "InternalError",
    "InvariantState",
    "MultiAtomResult",
    "PdeConfig",
    "PdeSolution",
    "RefineResult",
    "RiskCurveRow",
    "STRATEGY_FORMAT_VERSION",
    "SaddleReport",
    "ScanCurve",
    "ScanPoint",
    "SolveOutput",
    "StrategyFormatError",
    "StrategyTable",
    "SymmetricPrior",
    "TrialResult",
    "UGrid",
    "ValueTable",
    "assemble_bayes_risk",
    "evaluate",
    "extract_strategy",
    "from_invariant",
    "golden_section_max",
    "load_strategy",
    "loss_profile",
    "one_step_loss",
    "refine",
    "risk_curve",
    "saddle_check",
    "save_strategy",
    "scan",
    "search_multi_atom",
    "simulate_bernoulli",
    "simulate_gaussian",
    "solve_dimensional",
    "solve_invariant",
    "solve_pde",
    "to_invariant",
    "transition_variance",
]
