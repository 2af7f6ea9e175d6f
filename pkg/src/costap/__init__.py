"""Joint radar receive-filter and waveform co-design by alternating
minimization, with four equivalent waveform-stage solvers."""

from .am_driver import (
    SOLVERS,
    IterateRecord,
    IterateTrace,
    RunReport,
    constraint_set_drift,
    draw_waveform,
    full_objective,
    functional_relation_check,
    hull_diameter,
    initial_waveform,
    run,
)
from .errors import (
    CostapError,
    Infeasible,
    NoSignChange,
    NotHermitian,
    NotPSD,
    NumericalFailure,
    ParseError,
    SingularCovariance,
    SingularHessian,
    ValidationError,
    ZeroSteering,
    ZeroVector,
    ZeroWaveform,
)
from .harness_cli import (
    ComparisonTable,
    ExperimentSpec,
    TableRow,
    default_scenario_path,
    emit_table,
    emit_trace,
    load_scenario,
    main,
    read_trace,
    run_comparison,
    scenario_from_dict,
)
from .matrix_ops import bisect_root, hermitian_sqrt, kron, pseudo_inverse, vector_projector
from .radar_model import (
    ClutterSpec,
    CovarianceBundle,
    InterfererSpec,
    ScenarioConfig,
    TargetSpec,
    build_bundle,
    build_clutter_operators,
    build_interference_cov,
    build_noise_cov,
    build_target_map,
    clutter_cov,
    doppler_steering,
    spatial_steering,
    total_cov,
    waveform_hessian,
)
from .receiver import mvdr_update
from .waveform_solvers import (
    DualCertificate,
    WaveformProblem,
    WaveformSolution,
    align_phase,
    cls_solve,
    direct_update,
    qcqp_solve,
    scale_solution,
    sdp_certificate,
    sdp_dual_solve,
    secular_residual,
)

__version__ = "0.1.0"

__all__ = [
    "SOLVERS",
    "IterateRecord",
    "IterateTrace",
    "RunReport",
    "constraint_set_drift",
    "draw_waveform",
    "full_objective",
    "functional_relation_check",
    "hull_diameter",
    "initial_waveform",
    "run",
    "CostapError",
    "Infeasible",
    "NoSignChange",
    "NotHermitian",
    "NotPSD",
    "NumericalFailure",
    "ParseError",
    "SingularCovariance",
    "SingularHessian",
    "ValidationError",
    "ZeroSteering",
    "ZeroVector",
    "ZeroWaveform",
    "ComparisonTable",
    "ExperimentSpec",
    "TableRow",
    "default_scenario_path",
    "emit_table",
    "emit_trace",
    "load_scenario",
    "main",
    "read_trace",
    "run_comparison",
    "scenario_from_dict",
    "bisect_root",
    "hermitian_sqrt",
    "kron",
    "pseudo_inverse",
    "vector_projector",
    "ClutterSpec",
    "CovarianceBundle",
    "InterfererSpec",
    "ScenarioConfig",
    "TargetSpec",
    "build_bundle",
    "build_clutter_operators",
    "build_interference_cov",
    "build_noise_cov",
    "build_target_map",
    "clutter_cov",
    "doppler_steering",
    "spatial_steering",
    "total_cov",
    "waveform_hessian",
    "mvdr_update",
    "DualCertificate",
    "WaveformProblem",
    "WaveformSolution",
    "align_phase",
    "cls_solve",
    "direct_update",
    "qcqp_solve",
    "scale_solution",
    "sdp_certificate",
    "sdp_dual_solve",
    "secular_residual",
]
