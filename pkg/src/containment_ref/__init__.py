"""Distributed containment reference generation and verification toolkit.

A library, simulator, and CLI for steering follower agents into a scaled
convex hull spanned by moving leaders. Followers integrate a third-order
generator driven only by neighbor information; the analysis side certifies
convergence with a quadratic decay envelope and hull-margin geometry.
"""
from .analysis import (
    DiagnosticsFrame,
    containment_error,
    containment_error_rate,
    decay_envelope,
    decay_rate,
    filtered_error,
    fit_decay_rate,
    limit_target,
    lyapunov_value,
    stacked_coupling,
)
from .errors import (
    ContainmentError,
    DegenerateEdgeError,
    DegenerateFormationError,
    InconsistentViewError,
    LeaderReceivesEdgeError,
    NonFiniteStateError,
    ScenarioParseError,
    SelfLoopError,
    SingularFollowerBlockError,
    ValidationFailedError,
    ZeroDistanceError,
)
from .graph import (
    ConnectivityReport,
    InteractionGraph,
    LaplacianPartition,
    build_graph,
    check_connectivity,
    laplacian,
    partition,
)
from .hull import (
    ConvexPolygon,
    HullMargins,
    ThetaInterval,
    contains_point,
    edge_distance,
    hull_of_offsets,
    margins,
    scale_polygon,
    theta_interval,
)
from .leaders import (
    CircleTrajectory,
    FormationReport,
    LeaderModel,
    LineTrajectory,
    LissajousTrajectory,
    StationaryTrajectory,
    TrajectoryDerivatives,
    check_formation,
    drive_bound,
    eval_center,
    eval_leader,
    eval_scaled_leader,
)
from .observer import (
    AgentState,
    GainCheck,
    Gains,
    NeighborView,
    coupling_signal,
    state_derivative,
    validate_gains,
)
from .pose import Pose
from .scenario import load_scenario, parse_scenario
from .sim import (
    ScenarioConfig,
    SimulationRun,
    SystemModel,
    ValidationReport,
    convergence_time,
    default_initial,
    run,
    step,
    validate,
)

__version__ = "0.1.0"
