"""Versioned JSON file formats for trajectories, tokens, scenarios, and logs.

All formats round-trip losslessly: floats serialize via Python's
shortest round-trip repr, so load(save(x)) == x bit-exactly. Validation
errors name the JSON path of the offending field
(e.g. ``samples[3].gripper``), and writes are atomic (temp file +
rename) so a failed save never leaves a partial file behind.
"""

import json
import math
import os
import tempfile

import numpy as np

from .errors import SchemaError
from .geometry import CameraModel, DenseTrajectory, Frame, Pose, TimedSample
from .keyframes import SparseTrajectory
from .metrics import MetricReport
from .simulate import ExecutionLog, Perturbation, ReplanEvent, Scenario
from .tokens import Anchor, DepthMode, QuantizationSpec, TokenBlock, TokenSequence

__all__ = [
    "load_bundle",
    "save_bundle",
    "load_sparse_bundle",
    "save_sparse_bundle",
    "load_token_file",
    "save_token_file",
    "load_scenario",
    "save_scenario",
    "load_execution_log",
    "save_execution_log",
    "save_metric_report",
]

FORMAT_VERSION = 1
_UNITS = {"length": "meters", "time": "seconds", "angle": "radians"}


def _write_json(payload: dict, path) -> None:
    """Serialize fully, then atomically replace the target file."""
    text = json.dumps(payload, indent=2, allow_nan=False) + "\n"
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_json(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(str(path), f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError(str(path), "top-level value must be an object")
    return data


def _get(obj: dict, key: str, kind, path: str, optional: bool = False):
    if key not in obj:
        if optional:
            return None
        raise SchemaError(f"{path}.{key}" if path else key, "missing required field")
    value = obj[key]
    full = f"{path}.{key}" if path else key
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(full, f"expected a number, got {type(value).__name__}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaError(full, f"expected an integer, got {type(value).__name__}")
        return value
    if not isinstance(value, kind):
        raise SchemaError(full, f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def _number_list(obj: dict, key: str, n: int, path: str) -> list:
    values = _get(obj, key, list, path)
    full = f"{path}.{key}" if path else key
    if len(values) != n:
        raise SchemaError(full, f"expected {n} numbers, got {len(values)}")
    out = []
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise SchemaError(f"{full}[{i}]", "expected a number")
        out.append(float(v))
    return out


def _check_version(data: dict, path: str) -> None:
    version = _get(data, "version", int, path)
    if version != FORMAT_VERSION:
        raise SchemaError(f"{path}.version" if path else "version",
                          f"unsupported version {version}")


# ---------------------------------------------------------------------------
# trajectory bundles


def _sample_to_dict(s: TimedSample) -> dict:
    return {
        "t": s.t,
        "pos": [float(x) for x in s.pose.position],
        "euler_xyz": [float(x) for x in s.pose.euler_xyz],
        "gripper": s.gripper,
    }


def _sample_from_dict(obj, path: str) -> TimedSample:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    t = _get(obj, "t", float, path)
    pos = _number_list(obj, "pos", 3, path)
    euler = _number_list(obj, "euler_xyz", 3, path)
    gripper = _get(obj, "gripper", int, path)
    if gripper not in (0, 1):
        raise SchemaError(f"{path}.gripper", f"must be 0 or 1, got {gripper}")
    try:
        return TimedSample(t, Pose(pos, euler), gripper)
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from exc


def _camera_to_dict(cam: CameraModel) -> dict:
    return {
        "intrinsics": [float(x) for x in cam.intrinsics.reshape(-1)],
        "extrinsics_c2w": [float(x) for x in cam.extrinsics_c2w.reshape(-1)],
        "width": cam.width,
        "height": cam.height,
    }


def _camera_from_dict(obj, path: str) -> CameraModel:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    k = np.array(_number_list(obj, "intrinsics", 9, path)).reshape(3, 3)
    ext = np.array(_number_list(obj, "extrinsics_c2w", 16, path)).reshape(4, 4)
    width = _get(obj, "width", int, path)
    height = _get(obj, "height", int, path)
    try:
        return CameraModel(k, ext, width, height)
    except Exception as exc:
        raise SchemaError(path, str(exc)) from exc


def _bundle_payload(samples, frame: Frame, cam, meta, keyframe_flags=None,
                    end_velocities=None) -> dict:
    payload = {
        "version": FORMAT_VERSION,
        "frame": frame.value,
        "units": dict(_UNITS),
    }
    if cam is not None:
        payload["camera"] = _camera_to_dict(cam)
    payload["samples"] = [_sample_to_dict(s) for s in samples]
    if keyframe_flags is not None:
        payload["keyframe_flags"] = [bool(f) for f in keyframe_flags]
    if end_velocities is not None:
        v0, v1 = end_velocities
        payload["end_velocities"] = [[float(x) for x in v0], [float(x) for x in v1]]
    if meta is not None:
        payload["meta"] = meta
    return payload


def _parse_bundle(data: dict):
    _check_version(data, "")
    frame_str = _get(data, "frame", str, "")
    try:
        frame = Frame(frame_str)
    except ValueError:
        raise SchemaError("frame", f"must be 'camera' or 'world', got {frame_str!r}")
    units = _get(data, "units", dict, "")
    for key, expected in _UNITS.items():
        if units.get(key) != expected:
            raise SchemaError(f"units.{key}", f"must be {expected!r}")
    cam = None
    if "camera" in data:
        cam = _camera_from_dict(data["camera"], "camera")
    if frame is Frame.CAMERA and cam is None:
        raise SchemaError("camera", "required when frame is 'camera'")
    raw_samples = _get(data, "samples", list, "")
    samples = [_sample_from_dict(s, f"samples[{i}]") for i, s in enumerate(raw_samples)]
    times = [s.t for s in samples]
    for i in range(1, len(times)):
        if times[i] <= times[i - 1]:
            raise SchemaError(f"samples[{i}].t", "timestamps must be strictly increasing")
    return samples, frame, cam


def save_bundle(traj: DenseTrajectory, cam: CameraModel | None, path, meta=None) -> None:
    _write_json(_bundle_payload(traj.samples, traj.frame, cam, meta), path)


def load_bundle(path) -> tuple:
    """Load a dense trajectory bundle -> (DenseTrajectory, CameraModel | None)."""
    samples, frame, cam = _parse_bundle(_read_json(path))
    if len(samples) < 2:
        raise SchemaError("samples", f"need >= 2 samples, got {len(samples)}")
    return DenseTrajectory(tuple(samples), frame), cam


def save_sparse_bundle(sparse: SparseTrajectory, cam: CameraModel | None, path,
                       meta=None, end_velocities=None) -> None:
    """Write a sparse bundle; optional ``end_velocities`` (v0, v1) are stored
    as detokenizer hints enabling clamped-end refits downstream."""
    _write_json(
        _bundle_payload(sparse.waypoints, sparse.frame, cam, meta,
                        keyframe_flags=sparse.keyframe_flags,
                        end_velocities=end_velocities),
        path,
    )


def load_sparse_bundle(path) -> tuple:
    """Load a sparse trajectory bundle -> (SparseTrajectory, CameraModel | None)."""
    data = _read_json(path)
    samples, frame, cam = _parse_bundle(data)
    flags = _get(data, "keyframe_flags", list, "")
    if len(flags) != len(samples):
        raise SchemaError("keyframe_flags", "length does not match samples")
    for i, f in enumerate(flags):
        if not isinstance(f, bool):
            raise SchemaError(f"keyframe_flags[{i}]", "expected a boolean")
    return SparseTrajectory(tuple(samples), tuple(flags), frame), cam


def read_end_velocities(path) -> tuple | None:
    """Detokenizer end-slope hints from a sparse bundle, if present."""
    data = _read_json(path)
    if "end_velocities" not in data:
        return None
    raw = _get(data, "end_velocities", list, "")
    if len(raw) != 2:
        raise SchemaError("end_velocities", "expected two 3-vectors")
    pair = []
    for i, v in enumerate(raw):
        path_i = f"end_velocities[{i}]"
        if not isinstance(v, list) or len(v) != 3 or any(
                isinstance(x, bool) or not isinstance(x, (int, float)) for x in v):
            raise SchemaError(path_i, "expected a 3-vector of numbers")
        pair.append(np.array([float(x) for x in v]))
    return pair[0], pair[1]


# ---------------------------------------------------------------------------
# token files


def save_token_file(tokens: TokenSequence, path) -> None:
    spec = tokens.spec
    payload = {
        "version": FORMAT_VERSION,
        "quantization": {
            "depth": {"min": spec.depth_min, "max": spec.depth_max, "bins": spec.depth_bins},
            "uv": {"width": spec.width, "height": spec.height},
            "angle": {"bins": spec.angle_bins},
            "depth_mode": spec.depth_mode.value,
            "depth_delta_max": spec.depth_delta_max,
        },
        "anchor": {
            "u": tokens.anchor.u,
            "v": tokens.anchor.v,
            "d": tokens.anchor.d,
            "source": tokens.anchor.depth_source.value,
        },
        "blocks": [
            {"d": b.d_token, "u": b.u_token, "v": b.v_token, "g": b.g_token,
             "r": list(b.r_tokens)}
            for b in tokens.blocks
        ],
    }
    _write_json(payload, path)


def parse_quantization(obj, path: str = "quantization") -> QuantizationSpec:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    depth = _get(obj, "depth", dict, path)
    uv = _get(obj, "uv", dict, path)
    angle = _get(obj, "angle", dict, path)
    mode_str = _get(obj, "depth_mode", str, path)
    try:
        mode = DepthMode(mode_str)
    except ValueError:
        raise SchemaError(f"{path}.depth_mode", f"unknown mode {mode_str!r}")
    delta = obj.get("depth_delta_max")
    if delta is not None and (isinstance(delta, bool) or not isinstance(delta, (int, float))):
        raise SchemaError(f"{path}.depth_delta_max", "expected a number or null")
    try:
        return QuantizationSpec(
            width=_get(uv, "width", int, f"{path}.uv"),
            height=_get(uv, "height", int, f"{path}.uv"),
            depth_min=_get(depth, "min", float, f"{path}.depth"),
            depth_max=_get(depth, "max", float, f"{path}.depth"),
            depth_bins=_get(depth, "bins", int, f"{path}.depth"),
            angle_bins=_get(angle, "bins", int, f"{path}.angle"),
            depth_mode=mode,
            depth_delta_max=None if delta is None else float(delta),
        )
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from exc


def load_token_file(path) -> TokenSequence:
    data = _read_json(path)
    _check_version(data, "")
    spec = parse_quantization(_get(data, "quantization", dict, ""))
    anchor_obj = _get(data, "anchor", dict, "")
    try:
        anchor = Anchor(
            _get(anchor_obj, "u", float, "anchor"),
            _get(anchor_obj, "v", float, "anchor"),
            _get(anchor_obj, "d", float, "anchor"),
            _get(anchor_obj, "source", str, "anchor"),
        )
    except ValueError as exc:
        raise SchemaError("anchor", str(exc)) from exc
    blocks = []
    for i, b in enumerate(_get(data, "blocks", list, "")):
        bpath = f"blocks[{i}]"
        if not isinstance(b, dict):
            raise SchemaError(bpath, "expected an object")
        r = _number_list(b, "r", 3, bpath)
        try:
            blocks.append(TokenBlock(
                _get(b, "d", int, bpath),
                _get(b, "u", int, bpath),
                _get(b, "v", int, bpath),
                _get(b, "g", int, bpath),
                tuple(int(x) for x in r),
            ))
        except ValueError as exc:
            raise SchemaError(bpath, str(exc)) from exc
    try:
        return TokenSequence(spec, anchor, tuple(blocks))
    except ValueError as exc:
        raise SchemaError("blocks", str(exc)) from exc


# ---------------------------------------------------------------------------
# scenarios and execution logs


def save_scenario(scenario: Scenario, path) -> None:
    plan = scenario.initial_plan
    payload = {
        "version": FORMAT_VERSION,
        "initial_plan": {
            "frame": plan.frame.value,
            "samples": [_sample_to_dict(s) for s in plan.waypoints],
            "keyframe_flags": [bool(f) for f in plan.keyframe_flags],
        },
        "perturbations": [
            {"time": p.time, "offset": [float(x) for x in p.offset]}
            for p in scenario.perturbations
        ],
        "replan_interval": scenario.replan_interval,
        "control_rate": scenario.control_rate,
        "duration": scenario.duration,
        "replan_enabled": scenario.replan_enabled,
        "delayed_planner": scenario.delayed_planner,
    }
    _write_json(payload, path)


def load_scenario(path) -> Scenario:
    data = _read_json(path)
    _check_version(data, "")
    plan_obj = _get(data, "initial_plan", dict, "")
    frame_str = _get(plan_obj, "frame", str, "initial_plan")
    try:
        frame = Frame(frame_str)
    except ValueError:
        raise SchemaError("initial_plan.frame", f"unknown frame {frame_str!r}")
    raw = _get(plan_obj, "samples", list, "initial_plan")
    samples = [
        _sample_from_dict(s, f"initial_plan.samples[{i}]") for i, s in enumerate(raw)
    ]
    flags = _get(plan_obj, "keyframe_flags", list, "initial_plan")
    if len(flags) != len(samples):
        raise SchemaError("initial_plan.keyframe_flags", "length does not match samples")
    try:
        plan = SparseTrajectory(tuple(samples), tuple(bool(f) for f in flags), frame)
    except ValueError as exc:
        raise SchemaError("initial_plan", str(exc)) from exc
    perts = []
    for i, p in enumerate(_get(data, "perturbations", list, "")):
        ppath = f"perturbations[{i}]"
        if not isinstance(p, dict):
            raise SchemaError(ppath, "expected an object")
        perts.append(Perturbation(_get(p, "time", float, ppath),
                                  _number_list(p, "offset", 3, ppath)))
    try:
        return Scenario(
            initial_plan=plan,
            perturbations=tuple(perts),
            replan_interval=_get(data, "replan_interval", float, ""),
            control_rate=_get(data, "control_rate", float, ""),
            duration=_get(data, "duration", float, ""),
            replan_enabled=bool(data.get("replan_enabled", True)),
            delayed_planner=bool(data.get("delayed_planner", False)),
        )
    except ValueError as exc:
        raise SchemaError("", str(exc)) from exc


def save_execution_log(log: ExecutionLog, path) -> None:
    payload = {
        "version": FORMAT_VERSION,
        "commanded": {
            "frame": log.commanded.frame.value,
            "samples": [_sample_to_dict(s) for s in log.commanded.samples],
        },
        "replan_events": [
            {
                "time": e.time,
                "dropped_count": e.dropped_count,
                "gamma_at_kstar": None if math.isnan(e.gamma_at_kstar) else e.gamma_at_kstar,
                "kstar": e.kstar,
                "kstar_dropped": e.kstar_dropped,
            }
            for e in log.replan_events
        ],
        "final_error": log.final_error,
    }
    _write_json(payload, path)


def load_execution_log(path) -> ExecutionLog:
    data = _read_json(path)
    _check_version(data, "")
    cmd = _get(data, "commanded", dict, "")
    frame = Frame(_get(cmd, "frame", str, "commanded"))
    samples = [
        _sample_from_dict(s, f"commanded.samples[{i}]")
        for i, s in enumerate(_get(cmd, "samples", list, "commanded"))
    ]
    events = []
    for i, e in enumerate(_get(data, "replan_events", list, "")):
        epath = f"replan_events[{i}]"
        gamma = e.get("gamma_at_kstar")
        events.append(ReplanEvent(
            _get(e, "time", float, epath),
            _get(e, "dropped_count", int, epath),
            math.nan if gamma is None else float(gamma),
            _get(e, "kstar", int, epath),
            bool(_get(e, "kstar_dropped", bool, epath)),
        ))
    return ExecutionLog(
        DenseTrajectory(tuple(samples), frame),
        tuple(events),
        _get(data, "final_error", float, ""),
    )


def save_metric_report(report: MetricReport, path) -> None:
    """Write a report keyed by exactly the ten row names plus "config"."""
    _write_json(report.as_dict(), path)
