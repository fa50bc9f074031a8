"""soliton-pole-lab: two-soliton mKdV solutions on complex domains.

Evaluate exact two-soliton solutions of u_t + 6 u^2 u_x + u_xxx = 0 at
complex x, locate and track their poles over time, verify the closed-form
structure of the pole pattern (asymptotic families, exceptional collisions,
vertical-motion sign law, translation identities), and construct finite-time
blowup solutions by sampling on a line Im x = -alpha.
"""

from .analysis import (
    LineScan,
    RealDecomp,
    VerticalSign,
    check_no_real_poles,
    cos_identities_residual,
    factor_F,
    odd_parity_translation,
    odd_translation_residuals,
    parity_translation_theta,
    real_decomp,
    residue_at_pole,
    translation_residual,
    vertical_sign,
)
from .asymptotics import (
    CurveMatch,
    FamilyLabel,
    MatchReport,
    MovingFrame,
    Speed,
    match_families,
    predicted_pole,
    seed_state,
    seed_time,
    slow_lattice_point,
    strip_labels,
    tangent_slope,
)
from .blowup import (
    BlowupScenario,
    Crossing,
    GridSpec,
    ProfileSample,
    RateFit,
    blowup_profile,
    build_scenario,
    choose_alpha,
    coupled_system_residual,
    find_crossing,
    fit_blowup_rate,
)
from .cli import main, run
from .exppoly import (
    ExpPoly,
    ExpTerm,
    RootSet,
    build_F_poly,
    build_G_poly,
    exp_poly_eval,
    oracle_poles,
    roots_at_time,
    x_to_y,
    y_to_x,
)
from .interaction import (
    CRITICAL_RATIO,
    SWEEP_HEADER,
    count_maxima_at_interaction,
    extremum_speed,
    find_maxima,
    maxima_transition_ratio,
    measure_extremum_speed,
    measure_uxx_at_center,
    negative_speed_onset,
    sweep_rows,
    uxx_at_center,
)
from .kernel import (
    CommensurabilityInfo,
    ConvergenceError,
    PoleError,
    PoleMarker,
    SolitonConfig,
    Variant,
    eqg_residual,
    eval_f,
    eval_FG,
    eval_g,
    eval_one_soliton,
    eval_u,
    eval_u_sumform,
    interaction_point,
    pde_residual,
)
from .suite import BatteryReport, CheckResult, run_battery
from .tracker import (
    BranchClass,
    BranchFit,
    PoleCurve,
    TrackerOptions,
    classify_branch,
    curve_to_csv_rows,
    detect_exceptional,
    mirror_curve,
    position_at,
    track_curve,
    track_zero_curve,
)

__version__ = "0.1.0"

__all__ = [
    # kernel
    "CommensurabilityInfo",
    "ConvergenceError",
    "PoleError",
    "PoleMarker",
    "SolitonConfig",
    "Variant",
    "eqg_residual",
    "eval_f",
    "eval_FG",
    "eval_g",
    "eval_one_soliton",
    "eval_u",
    "eval_u_sumform",
    "interaction_point",
    "pde_residual",
    # exppoly
    "ExpPoly",
    "ExpTerm",
    "RootSet",
    "build_F_poly",
    "build_G_poly",
    "exp_poly_eval",
    "oracle_poles",
    "roots_at_time",
    "x_to_y",
    "y_to_x",
    # tracker
    "BranchClass",
    "BranchFit",
    "PoleCurve",
    "TrackerOptions",
    "classify_branch",
    "curve_to_csv_rows",
    "detect_exceptional",
    "mirror_curve",
    "position_at",
    "track_curve",
    "track_zero_curve",
    # asymptotics
    "CurveMatch",
    "FamilyLabel",
    "MatchReport",
    "MovingFrame",
    "Speed",
    "match_families",
    "predicted_pole",
    "seed_state",
    "seed_time",
    "slow_lattice_point",
    "strip_labels",
    "tangent_slope",
    # analysis
    "LineScan",
    "RealDecomp",
    "VerticalSign",
    "check_no_real_poles",
    "cos_identities_residual",
    "factor_F",
    "odd_parity_translation",
    "odd_translation_residuals",
    "parity_translation_theta",
    "real_decomp",
    "residue_at_pole",
    "translation_residual",
    "vertical_sign",
    # blowup
    "BlowupScenario",
    "Crossing",
    "GridSpec",
    "ProfileSample",
    "RateFit",
    "blowup_profile",
    "build_scenario",
    "choose_alpha",
    "coupled_system_residual",
    "find_crossing",
    "fit_blowup_rate",
    # interaction
    "CRITICAL_RATIO",
    "SWEEP_HEADER",
    "count_maxima_at_interaction",
    "extremum_speed",
    "find_maxima",
    "maxima_transition_ratio",
    "measure_extremum_speed",
    "measure_uxx_at_center",
    "negative_speed_onset",
    "sweep_rows",
    "uxx_at_center",
    # suite
    "BatteryReport",
    "CheckResult",
    "run_battery",
    # cli
    "main",
    "run",
    "__version__",
]
