"""Canonical heights, local heights and the dynamical Mahler formula for
endomorphisms of projective space over Q."""
from .archplaces import canonical_metric_norm, convergence_report, green_grid, green_value
from .dynmodel import (
    MapModel,
    bad_reduction_primes,
    check_negativity_conditions,
    iterate_lift,
    load_model,
    model_from_dict,
    pushforward_form,
    validate_model,
)
from .equilibrium import build_tree, integrate_log, integrate_log_ratio, invariance_check, preimage_fiber
from .errors import (
    ArithDynError,
    BudgetError,
    CapabilityError,
    IndeterminateError,
    InputError,
    ModelError,
    NumericFailure,
    ParseError,
    UnsupportedGeometry,
)
from .finiteplaces import E_finite, S_v, finite_local_height, hensel_rational_roots, local_height_sequence
from .heights import (
    HeightValue,
    canonical_height_divisor,
    canonical_height_divisor_split,
    canonical_height_point,
    naive_height,
    pushforward_divisor,
)
from .mahler import MahlerConfig, MahlerReport, corollary_check, inequality_check, mahler_report

__version__ = "0.1.0"
