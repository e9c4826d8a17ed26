"""trajkit: sparse trajectory processing for robot end effectors.

Keyframe sparsification of dense demonstrations, anchor-conditioned
waypoint token codecs with camera geometry, a spline detokenizer that
turns waypoints into smooth high-rate trajectories, closed-loop replan
merging, a kinematic simulation harness, and a trajectory-similarity
metric suite.
"""

from .errors import (
    BehindCameraError,
    DepthRangeError,
    EmptyPlanError,
    InsufficientDataError,
    InvalidCameraError,
    OutOfFrameError,
    SchemaError,
    TrajkitError,
    UndefinedDirectionError,
)
from .geometry import (
    CameraModel,
    DenseTrajectory,
    Frame,
    Pose,
    TimedSample,
    UnitQuaternion,
    back_project,
    camera_to_world,
    euler_to_quaternion,
    finite_difference_accel,
    normalize_angles,
    project,
    quaternion_to_euler,
)
from .keyframes import (
    KeyframeReason,
    KeyframeSet,
    SparseTrajectory,
    gripper_change_indices,
    insert_sub_keyframes,
    select_keyframes,
)
from .metrics import (
    REPORT_ROW_NAMES,
    MetricReport,
    coverage,
    discrete_frechet,
    dtw,
    endpoint_errors,
    full_report,
    hausdorff,
    orthogonal_distances,
)
from .replan import (
    ControllerState,
    PendingPlan,
    controller_step,
    forward_direction,
    keep_test,
    merge_replan,
    nearest_pending_index,
    refresh_pending,
)
from .simulate import (
    ExecutionLog,
    Perturbation,
    ReplanEvent,
    Scenario,
    oracle_planner,
    run,
    smoothness_check,
)
from .splines import (
    ContinuousTrajectory,
    OrientationTrack,
    PositionSpline,
    eval_trajectory,
    fit,
    reconstruction_error,
    resample,
    slerp,
)
from .tokens import (
    Anchor,
    DepthMode,
    DepthSource,
    QuantizationSpec,
    TokenBlock,
    TokenSequence,
    anchor_depth_from_prior,
    decode_sequence,
    dequantize,
    encode_sequence,
    quantize,
)

__version__ = "0.1.0"

__all__ = [
    "TrajkitError", "InvalidCameraError", "BehindCameraError",
    "InsufficientDataError", "OutOfFrameError", "DepthRangeError",
    "SchemaError", "EmptyPlanError", "UndefinedDirectionError",
    "Frame", "Pose", "UnitQuaternion", "CameraModel", "TimedSample",
    "DenseTrajectory", "back_project", "project", "camera_to_world",
    "euler_to_quaternion", "quaternion_to_euler", "normalize_angles",
    "finite_difference_accel",
    "KeyframeReason", "KeyframeSet", "SparseTrajectory",
    "select_keyframes", "insert_sub_keyframes", "gripper_change_indices",
    "DepthSource", "DepthMode", "Anchor", "QuantizationSpec", "TokenBlock",
    "TokenSequence", "quantize", "dequantize", "encode_sequence",
    "decode_sequence", "anchor_depth_from_prior",
    "PositionSpline", "OrientationTrack", "ContinuousTrajectory", "slerp",
    "fit", "eval_trajectory", "resample", "reconstruction_error",
    "PendingPlan", "ControllerState", "nearest_pending_index",
    "forward_direction", "keep_test", "refresh_pending", "merge_replan",
    "controller_step",
    "Perturbation", "Scenario", "ReplanEvent", "ExecutionLog",
    "oracle_planner", "run", "smoothness_check",
    "MetricReport", "REPORT_ROW_NAMES", "dtw", "discrete_frechet",
    "hausdorff", "orthogonal_distances", "endpoint_errors", "coverage",
    "full_report",
]
