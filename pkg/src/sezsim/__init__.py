"""Zone-enterprise simulator with correlation-based structural diagnostics."""

from .core import (
    ControlSchedule,
    ControlVector,
    DisturbanceSchedule,
    DisturbanceVector,
    Enterprise,
    ParameterMatrix,
    SimulationError,
    SystemMatrices,
    TimeGrid,
    ValidationError,
    Zone,
    monthly_rate,
    validate_zone,
)
from .dynamics import (
    EnterpriseTrajectory,
    Event,
    InsufficientHistoryError,
    PlanningPolicy,
    Trajectory,
    observe,
    plan,
    simulate,
    step,
)
from .sanctions import (
    DistressState,
    SanctionsRegime,
    apply_regime,
    sales_multiplier,
    update_distress,
)
from .adaptometry import (
    CorrelationMatrix,
    IndicatorResult,
    build_parameter_matrix,
    column_correlation,
    correlation_matrix,
    detect_structure_change,
    export_surface,
    integral_indicator,
)
from .policy import (
    DamageReport,
    MeasureEffect,
    damage_assessment,
    disturbance_sensitivity,
    evaluate_measure,
)
from .scenario import AdaptometrySettings, Scenario, ScenarioError, parse_scenario
from .pipeline import PipelineResult, run_pipeline, write_outputs

__version__ = "0.1.0"
