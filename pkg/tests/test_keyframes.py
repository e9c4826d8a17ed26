"""Keyframe selection and sub-keyframe insertion."""

import numpy as np
import pytest

import trajkit as tk
from conftest import helix_trajectory, line_trajectory


def brute_force_keyframes(times, comps, grippers, alpha, weights=None):
    """Independent oracle: plain-python scan of the keyframe criterion.

    Second differences per interior sample, maximal above-threshold runs
    collapsed to their peak (earliest on ties), gripper toggles at the
    later index, endpoints forced.
    """
    n = len(times)
    w = [1.0] * 6 if weights is None else list(weights)
    mags = []
    for i in range(1, n - 1):
        dt1 = times[i] - times[i - 1]
        dt2 = times[i + 1] - times[i]
        sq = 0.0
        for c in range(6):
            acc = 2 * ((comps[i + 1][c] - comps[i][c]) / dt2
                       - (comps[i][c] - comps[i - 1][c]) / dt1) / (dt1 + dt2)
            sq += (w[c] * acc) ** 2
        mags.append(sq ** 0.5)

    reasons = {0: {"forced_endpoint"}, n - 1: {"forced_endpoint"}}
    run = []
    for i in range(1, n - 1):
        if mags[i - 1] > alpha:
            run.append(i)
        elif run:
            peak = max(run, key=lambda j: (mags[j - 1], -j))
            reasons.setdefault(peak, set()).add("accel_threshold")
            run = []
    if run:
        peak = max(run, key=lambda j: (mags[j - 1], -j))
        reasons.setdefault(peak, set()).add("accel_threshold")
    for i in range(1, n):
        if grippers[i] != grippers[i - 1]:
            reasons.setdefault(i, set()).add("gripper_change")
    indices = sorted(reasons)
    return indices, [reasons[i] for i in indices]


def random_segmented_trajectory(rng, n_segments=None):
    """Mixed linear / acceleration-spike / gripper-toggle trajectory."""
    n_segments = n_segments or rng.integers(2, 6)
    dt = 0.05
    times, pos, grip = [0.0], [np.array([0.0, 0.0, 0.0])], [0]
    velocity = rng.normal(size=3) * 0.2
    for _ in range(n_segments):
        kind = rng.choice(["linear", "spike", "toggle"])
        steps = int(rng.integers(8, 20))
        if kind == "spike":
            velocity = rng.normal(size=3) * 0.2  # sharp direction change
        for _ in range(steps):
            times.append(times[-1] + dt)
            pos.append(pos[-1] + velocity * dt)
            grip.append(grip[-1])
        if kind == "toggle":
            grip[-1] = 1 - grip[-1]
    n = len(times)
    eul = np.zeros((n, 3))
    return tk.DenseTrajectory.from_arrays(np.array(times), np.array(pos), eul,
                                          np.array(grip), tk.Frame.WORLD)


class TestGripperChanges:
    def test_constant_gripper_empty(self):
        traj = line_trajectory(n=20)
        assert tk.gripper_change_indices(traj).size == 0

    def test_pattern(self):
        t = np.arange(5.0)
        traj = tk.DenseTrajectory.from_arrays(
            t, np.stack([t, 0 * t, 0 * t], axis=1), np.zeros((5, 3)),
            [0, 0, 1, 1, 0], tk.Frame.WORLD)
        assert list(tk.gripper_change_indices(traj)) == [2, 4]

    def test_random_vs_scan(self, rng):
        for _ in range(50):
            n = int(rng.integers(2, 40))
            g = rng.integers(0, 2, n)
            t = np.arange(n, dtype=float)
            traj = tk.DenseTrajectory.from_arrays(
                t, np.stack([t, 0 * t, 0 * t], axis=1), np.zeros((n, 3)),
                g, tk.Frame.WORLD)
            expected = [i for i in range(1, n) if g[i] != g[i - 1]]
            assert list(tk.gripper_change_indices(traj)) == expected


class TestSelectKeyframes:
    def test_constant_velocity_endpoints_only(self):
        traj = line_trajectory(n=60)
        keys = tk.select_keyframes(traj, alpha=0.1)
        assert keys.indices == (0, 59)
        assert all(tk.KeyframeReason.FORCED_ENDPOINT in r for r in keys.reasons)

    def test_gripper_toggle_marked(self):
        t = np.linspace(0, 1, 100)
        pos = np.stack([t, 0 * t, 0 * t], axis=1)
        g = np.where(np.arange(100) >= 50, 1, 0)
        traj = tk.DenseTrajectory.from_arrays(t, pos, np.zeros((100, 3)), g,
                                              tk.Frame.WORLD)
        keys = tk.select_keyframes(traj, alpha=1e6)
        assert 50 in keys.indices
        idx = keys.indices.index(50)
        assert tk.KeyframeReason.GRIPPER_CHANGE in keys.reasons[idx]

    def test_triangular_profile_single_spike(self):
        # velocity reverses at the midpoint: exactly one interior keyframe
        n, mid = 61, 30
        t = np.arange(n) * 0.05
        x = np.where(np.arange(n) <= mid, np.arange(n), 2 * mid - np.arange(n)) * 0.1
        traj = tk.DenseTrajectory.from_arrays(
            t, np.stack([x, 0 * t, 0 * t], axis=1), np.zeros((n, 3)),
            np.zeros(n, dtype=int), tk.Frame.WORLD)
        _, mags = tk.finite_difference_accel(traj)
        keys = tk.select_keyframes(traj, alpha=float(mags.max()) / 2)
        assert keys.indices == (0, mid, n - 1)

    def test_alpha_monotonicity(self, rng):
        traj = random_segmented_trajectory(rng)
        lo = tk.select_keyframes(traj, alpha=0.5)
        hi = tk.select_keyframes(traj, alpha=2.0)

        def accel_set(keys):
            return {i for i, r in zip(keys.indices, keys.reasons)
                    if tk.KeyframeReason.ACCEL_THRESHOLD in r}

        assert accel_set(hi) <= accel_set(lo)

    def test_matches_brute_force(self, rng):
        for _ in range(30):
            traj = random_segmented_trajectory(rng)
            alpha = float(rng.uniform(0.5, 5.0))
            keys = tk.select_keyframes(traj, alpha)
            comps = np.hstack([traj.positions, traj.eulers])
            exp_idx, exp_reasons = brute_force_keyframes(
                traj.times, comps, traj.grippers, alpha)
            assert list(keys.indices) == exp_idx
            got_reasons = [{r.value for r in rs} for rs in keys.reasons]
            assert got_reasons == exp_reasons

    def test_rejects_bad_inputs(self):
        traj = line_trajectory(n=10)
        with pytest.raises(ValueError):
            tk.select_keyframes(traj, alpha=0.0)
        with pytest.raises(tk.InsufficientDataError):
            tk.select_keyframes(line_trajectory(n=2), alpha=1.0)


class TestInsertSubKeyframes:
    def test_n2_returns_keyframes(self):
        traj = line_trajectory(n=50)
        keys = tk.select_keyframes(traj, alpha=1.0)
        sparse = tk.insert_sub_keyframes(traj, keys, 2)
        assert len(sparse) == 2
        assert all(sparse.keyframe_flags)
        assert np.allclose(sparse.times, [0.0, 1.0])

    def test_line_midpoint(self):
        traj = line_trajectory(n=101)
        keys = tk.select_keyframes(traj, alpha=1.0)
        sparse = tk.insert_sub_keyframes(traj, keys, 3)
        assert np.allclose(sparse.times, [0.0, 0.5, 1.0])
        assert np.allclose(sparse.positions[1], [0.5, 0.0, 0.0])
        assert list(sparse.keyframe_flags) == [True, False, True]

    def test_helix_counts_and_spacing(self):
        # oracle: direct arithmetic on segment bounds
        traj = helix_trajectory(n=1001)
        g = traj.grippers.copy()
        g[500:] = 1  # one toggle -> two segments
        traj = tk.DenseTrajectory.from_arrays(traj.times, traj.positions,
                                              traj.eulers, g, tk.Frame.WORLD)
        keys = tk.select_keyframes(traj, alpha=1e9)
        n_segments = len(keys.indices) - 1
        sparse = tk.insert_sub_keyframes(traj, keys, 11)
        assert len(sparse) == 10 * n_segments + 1
        times = sparse.times
        for a, b in zip(keys.indices, keys.indices[1:]):
            t0, t1 = traj.times[a], traj.times[b]
            seg = times[(times >= t0 - 1e-12) & (times <= t1 + 1e-12)]
            assert np.abs(np.diff(seg) - (t1 - t0) / 10).max() < 1e-9

    def test_interior_pose_from_nearest_sample(self):
        # irregular sampling: grid time 0.5 sits nearest to the sample at 0.45
        t = np.array([0.0, 0.45, 0.62, 1.0])
        pos = np.stack([t * 2, 0 * t, 0 * t], axis=1)
        traj = tk.DenseTrajectory.from_arrays(t, pos, np.zeros((4, 3)),
                                              np.zeros(4, dtype=int), tk.Frame.WORLD)
        keys = tk.KeyframeSet((0, 3), (frozenset([tk.KeyframeReason.FORCED_ENDPOINT]),) * 2)
        sparse = tk.insert_sub_keyframes(traj, keys, 3)
        assert sparse.times[1] == 0.5
        assert np.allclose(sparse.positions[1], [0.9, 0, 0])  # pose of t=0.45

    def test_tie_prefers_earlier_sample(self):
        t = np.array([0.0, 0.25, 0.75, 1.0])
        pos = np.stack([[0.0, 1.0, 3.0, 4.0], [0.0] * 4, [0.0] * 4], axis=1)
        traj = tk.DenseTrajectory.from_arrays(t, pos, np.zeros((4, 3)),
                                              np.zeros(4, dtype=int), tk.Frame.WORLD)
        keys = tk.KeyframeSet((0, 3), (frozenset([tk.KeyframeReason.FORCED_ENDPOINT]),) * 2)
        sparse = tk.insert_sub_keyframes(traj, keys, 3)
        # 0.5 is equidistant from 0.25 and 0.75 -> earlier sample wins
        assert np.allclose(sparse.positions[1], [1.0, 0, 0])

    def test_quiet_trajectory_has_n_waypoints(self, rng):
        traj = line_trajectory(n=80)
        keys = tk.select_keyframes(traj, alpha=10.0)
        for n in (2, 5, 9):
            sparse = tk.insert_sub_keyframes(traj, keys, n)
            assert len(sparse) == n

    def test_timestamps_cover_span_strictly_increasing(self, rng):
        traj = random_segmented_trajectory(rng)
        keys = tk.select_keyframes(traj, alpha=1.0)
        sparse = tk.insert_sub_keyframes(traj, keys, 7)
        times = sparse.times
        assert times[0] == traj.times[0]
        assert times[-1] == traj.times[-1]
        assert np.all(np.diff(times) > 0)

    def test_rejects_small_n(self):
        traj = line_trajectory(n=10)
        keys = tk.select_keyframes(traj, alpha=1.0)
        with pytest.raises(ValueError):
            tk.insert_sub_keyframes(traj, keys, 1)
