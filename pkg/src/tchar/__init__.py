"""Q-family and Student t distributions with order-statistic characterization checks."""

from ._kernels import BACKEND
from .characterization import (
    ResidualReport,
    lemma1_ode_residual,
    log_slope_residual,
    quantile_grid,
    star_residual,
    theorem1_residual,
    theorem2_residual,
)
from .distributions import (
    DistributionModel,
    QFamilyParams,
    StudentTParams,
    exponential,
    fit_qfamily,
    normal,
    qfamily,
    sample,
    student_t,
    uniform,
    z_distribution,
    z_pdf,
)
from .errors import (
    BracketError,
    ConvergenceError,
    DegenerateConditioningError,
    DomainError,
    InsufficientDataError,
    MomentError,
    QuadratureError,
    RankError,
    TcharError,
)
from .numerics import Interval, QuadratureResult, integrate, invert_monotone, log_gamma, minimize, regularized_incomplete_beta
from .order_stats import OrderStatContext, Side, avg_cond_moment, cond_density, truncated_moment
from .simulation import RegressionEstimate, compare_report, simulate_regression

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BracketError",
    "ConvergenceError",
    "DegenerateConditioningError",
    "DistributionModel",
    "DomainError",
    "InsufficientDataError",
    "Interval",
    "MomentError",
    "OrderStatContext",
    "QFamilyParams",
    "QuadratureError",
    "QuadratureResult",
    "RankError",
    "RegressionEstimate",
    "ResidualReport",
    "Side",
    "StudentTParams",
    "TcharError",
    "avg_cond_moment",
    "compare_report",
    "cond_density",
    "exponential",
    "fit_qfamily",
    "integrate",
    "invert_monotone",
    "lemma1_ode_residual",
    "log_gamma",
    "log_slope_residual",
    "minimize",
    "normal",
    "qfamily",
    "quantile_grid",
    "regularized_incomplete_beta",
    "sample",
    "simulate_regression",
    "star_residual",
    "student_t",
    "theorem1_residual",
    "theorem2_residual",
    "truncated_moment",
    "uniform",
    "z_distribution",
    "z_pdf",
]
