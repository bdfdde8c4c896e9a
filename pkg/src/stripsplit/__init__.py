"""Exact ANOVA, F tests and Monte Carlo checks for the balanced strip-split plot design."""
from .compare import compare, factorial_anova, split_split_anova
from .data import (
    BalancedLayout,
    DuplicateCell,
    IndexOutOfRange,
    LayoutError,
    MissingCell,
    ParseError,
    TooFewLevels,
    ingest_csv,
    load_beans,
    marginal_mean,
    read_csv,
)
from .design import ALL_MODELS, DesignDims, EffectKind, ModelVariant, Source, degrees_of_freedom, derived_effect_kind
from .df_approx import DomainError, MsPoint, aw_f, aw_pair, aw_rstar, satterthwaite
from .distributions import f_lower_tail, f_upper_tail, make_stream, sample_normal
from .ems import EmsExpression, VarianceComponent, ems, ems_table
from .f_tests import FTestSpec, evaluate, f_test_plan, verify_exactness
from .simulator import SimSpec, covariance_matrix, simulate, simulate_one, type1_error, verify_ems
from .sums_of_squares import AnovaTable, anova_table, projector, ss_direct, ss_kronecker

__version__ = "0.1.0"
