"""Exact counting, exponential sums and circle-method diagnostics for
systems of diagonal forms."""

__version__ = "0.1.0"

from .forms import (
    DiagonalSystem,
    ExponentTuple,
    TheoremConstants,
    constants,
    evaluate_forms,
    load_system,
    validate_system,
)
from .counting import (
    CountReport,
    MomentSpec,
    count_zeros_brute,
    count_zeros_mim,
    exponent_fit,
    moment_count,
    translation_invariance_check,
    vinogradov_count,
)
from .expsums import (
    PolyPhase,
    complete_sum,
    complete_sum_system,
    poly_phase_sum,
    psi,
    psi_star,
    system_weyl_sum,
    vdc_ratio,
    weyl_sum,
)
from .oscillatory import (
    QuadratureResult,
    RealCertificate,
    SingularIntegral,
    decay_check,
    real_nonsingular_search,
    singular_integral_smoothed,
    singular_integral_truncated,
    v_k,
    v_system,
)
from .series import (
    PadicCertificate,
    SeriesApproximation,
    T_q,
    count_mod,
    euler_identity_check,
    hensel_lift,
    padic_search,
    padic_sweep,
    series_truncated,
)
from .arcs import (
    ArcLabel,
    ArcParams,
    arc_params,
    arcs_disjoint,
    best_rational_approx,
    classify,
    combine_approx,
    cond_beta_holds,
    main_term,
    major_arc_integral,
    system_major_error,
    weyl_major_error,
    xi,
)
from .regions import RegionFlags, region_135

__all__ = [name for name in dir() if not name.startswith("_")]
