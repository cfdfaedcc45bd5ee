"""Synthetic replications of the two user studies, end to end."""

from .agents import (
    AgentParams,
    BLIND_DEPTH_MEAN_MM,
    BLIND_DEPTH_SIGMA_MM,
    DEFAULT_GRIP_PAD_PRESSURE_KPA,
    PickPlaceAgent,
    blind_agent_params,
    draw_blind_depth_mm,
    feedback_agent_params,
)
from .metrics import (
    ConfusionResult,
    MANIP_CSV_COLUMNS,
    ManipMetrics,
    THERMAL_CSV_COLUMNS,
    confusion_matrix,
    manip_metrics,
    manip_summary,
    thermal_summary,
    write_json_summary,
    write_manip_csv,
    write_thermal_csv,
)
from .plans import (
    CONDITIONS,
    COOL,
    HAPTIC_FEEDBACK,
    HOT,
    MANIP_TRIALS_PER_CONDITION,
    NO_FEEDBACK,
    STIMULI,
    STIMULUS_SETPOINTS_C,
    TRIALS_PER_STIMULUS,
    ManipPlan,
    ThermalPlan,
    WARM,
    plan_manip,
    plan_thermal,
)
from .sessions import (
    ManipTrialRecord,
    ThermalTrialRecord,
    run_manip_session,
    run_thermal_session,
)
from .stats import (
    SignTestResult,
    TTestResult,
    paired_t_test,
    regularized_incomplete_beta,
    sign_test,
    t_two_tailed_p,
)
from .subjects import SubjectModel

__all__ = [
    "AgentParams",
    "BLIND_DEPTH_MEAN_MM",
    "BLIND_DEPTH_SIGMA_MM",
    "CONDITIONS",
    "COOL",
    "ConfusionResult",
    "DEFAULT_GRIP_PAD_PRESSURE_KPA",
    "HAPTIC_FEEDBACK",
    "HOT",
    "MANIP_CSV_COLUMNS",
    "MANIP_TRIALS_PER_CONDITION",
    "ManipMetrics",
    "ManipPlan",
    "ManipTrialRecord",
    "NO_FEEDBACK",
    "PickPlaceAgent",
    "STIMULI",
    "STIMULUS_SETPOINTS_C",
    "SignTestResult",
    "SubjectModel",
    "THERMAL_CSV_COLUMNS",
    "TRIALS_PER_STIMULUS",
    "ThermalPlan",
    "ThermalTrialRecord",
    "TTestResult",
    "WARM",
    "blind_agent_params",
    "confusion_matrix",
    "draw_blind_depth_mm",
    "feedback_agent_params",
    "manip_metrics",
    "manip_summary",
    "paired_t_test",
    "plan_manip",
    "plan_thermal",
    "regularized_incomplete_beta",
    "run_manip_session",
    "run_thermal_session",
    "sign_test",
    "t_two_tailed_p",
    "thermal_summary",
    "write_json_summary",
    "write_manip_csv",
    "write_thermal_csv",
]
