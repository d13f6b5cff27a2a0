"""
Object motion field, motion strength and static-scene classification tests.
"""

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.spatial.transform import Rotation

from conftest import random_pose
from models.camera import Intrinsics, Pose
from models.depth import DepthKind, DepthMap
from models.motion import (
    FrameAlignment,
    InstanceTracks,
    MotionField,
    MotionReport,
    ObjectMotion,
    TrackPoint,
)
from models.scene import CameraPathConfig, ObjectConfig, SceneConfig
from services.geometry import backproject_pixels, project_points
from services.motion_estimator import (
    build_motion_report,
    classify_dynamic,
    motion_field,
    object_motion,
    object_strength,
    sample_keypoints,
    video_motion_strength,
)
from services.scene_synthesizer import render_scene


def _tracks(instance_id, frame_i, frame_j, src, dst, visible=None):
    visible = visible or [(True, True)] * len(src)
    points = []
    for k, ((u0, v0), (u1, v1), (vis0, vis1)) in enumerate(zip(src, dst, visible)):
        points.append(TrackPoint(frame=frame_i, keypoint_id=k, u=u0, v=v0, visible=vis0))
        if (u1, v1) != (None, None):
            points.append(TrackPoint(frame=frame_j, keypoint_id=k, u=u1, v=v1, visible=vis1))
    return InstanceTracks(instance_id=instance_id, points=tuple(points))


def _aligned(values):
    return DepthMap(values=np.asarray(values, dtype=np.float64), kind=DepthKind.ALIGNED)


def _field(du, dv, frame_i=0, frame_j=1):
    return MotionField(
        instance_id=1,
        frame_i=frame_i,
        frame_j=frame_j,
        keypoint_ids=np.arange(len(du)),
        du=du,
        dv=dv,
    )


def _render_strengths(render, depths=None):
    intr = render.config.intr
    depths = depths if depths is not None else render.depth_gt
    strengths = {}
    for tracks in render.tracks:
        fields = [
            motion_field(
                tracks,
                DepthMap(values=depths[i], kind=DepthKind.GROUND_TRUTH),
                render.poses[i],
                render.poses[i + 1],
                intr,
                i,
                i + 1,
            )
            for i in range(len(render.poses) - 1)
        ]
        strengths[tracks.instance_id] = object_strength(fields)
    return strengths


# Keypoint sampling


def test_sample_keypoints_full_mask():
    mask = np.ones((4, 4), dtype=np.uint8)
    assert sample_keypoints(mask, 1, 2) == [(0, 0), (2, 0), (0, 2), (2, 2)]


def test_sample_keypoints_absent_instance():
    assert sample_keypoints(np.ones((4, 4), dtype=np.uint8), 5, 2) == []


def test_sample_keypoints_brute_force(rng):
    mask = rng.integers(0, 4, (37, 53)).astype(np.uint8)
    expected = [
        (c, r)
        for r in range(0, 37, 3)
        for c in range(0, 53, 3)
        if mask[r, c] == 2
    ]
    assert sample_keypoints(mask, 2, 3) == expected


# Motion field


def test_static_points_have_zero_motion(rng, intr):
    pose_i = random_pose(rng)
    delta = Rotation.from_rotvec(rng.normal(0, 0.05, 3)).as_matrix()
    pose_j = Pose(
        rotation=delta @ pose_i.rotation,
        translation=pose_i.translation + rng.normal(0, 0.1, 3),
    )
    depth = rng.uniform(2.0, 6.0, (intr.height, intr.width))

    v, u = np.mgrid[8:120:7, 8:120:7].reshape(2, -1).astype(np.float64)
    world = backproject_pixels(pose_i, intr, u, v, depth[v.astype(int), u.astype(int)])
    uv_j, _ = project_points(pose_j, intr, world)

    tracks = _tracks(1, 0, 1, list(zip(u, v)), [tuple(p) for p in uv_j])
    field = motion_field(tracks, _aligned(depth), pose_i, pose_j, intr, 0, 1)
    assert len(field) > 0
    assert np.abs(field.du).max() < 1e-9
    assert np.abs(field.dv).max() < 1e-9


def test_identical_poses_pure_pixel_displacement(identity_pose, intr):
    depth = np.ones((intr.height, intr.width))
    tracks = _tracks(1, 0, 1, [(64.0, 64.0)], [(74.0, 64.0)])
    field = motion_field(tracks, _aligned(depth), identity_pose, identity_pose, intr, 0, 1)
    assert field.pairs == [(0, 0, 1, 0.078125, 0.0)]
    assert object_strength([field]) == 0.078125


def test_motion_field_skip_counts(identity_pose, intr):
    depth = np.ones((intr.height, intr.width))
    depth[10, 10] = 0.0
    translated = Pose(rotation=np.eye(3), translation=[0.0, 0.0, -3.0])
    tracks = _tracks(
        1,
        0,
        1,
        src=[(64.0, 64.0), (20.0, 20.0), (30.0, 30.0), (10.0, 10.0), (-5.0, 64.0), (64.0, 64.4)],
        dst=[(64.0, 64.0), (20.0, 20.0), (None, None), (10.0, 10.0), (0.0, 64.0), (64.0, 64.0)],
        visible=[(True, True), (False, True), (True, True), (True, True), (True, True), (True, True)],
    )
    field = motion_field(tracks, _aligned(depth), identity_pose, translated, intr, 0, 1)
    assert field.skipped.invisible == 2
    assert field.skipped.bad_depth == 1
    assert field.skipped.out_of_bounds == 1
    assert field.skipped.behind_camera == 2
    assert len(field) == 0


def test_visible_points_off_the_image_are_out_of_bounds(identity_pose, intr):
    depth = np.ones((intr.height, intr.width))
    tracks = _tracks(
        1,
        0,
        1,
        src=[(64.0, 64.0), (-0.6, 64.0), (64.0, 127.4), (64.0, 64.0), (10.0, 10.0)],
        dst=[(66.0, 64.0), (0.0, 64.0), (64.0, 127.0), (128.0, 64.0), (10.0, -1.0)],
    )
    field = motion_field(tracks, _aligned(depth), identity_pose, identity_pose, intr, 0, 1)
    assert field.skipped.out_of_bounds == 3
    assert field.skipped.bad_depth == 0
    assert field.keypoint_ids.tolist() == [0, 2]
    assert field.du.tolist() == [2.0 / 128, 0.0]


def test_motion_field_rejects_same_frame(identity_pose, intr):
    tracks = _tracks(1, 0, 1, [(64.0, 64.0)], [(64.0, 64.0)])
    with pytest.raises(ValueError):
        motion_field(
            tracks, _aligned(np.ones((128, 128))), identity_pose, identity_pose, intr, 3, 3
        )


def test_resolution_doubling_invariance(rng):
    for _ in range(1000):
        width, height = int(rng.integers(8, 32)), int(rng.integers(8, 32))
        intr = Intrinsics(
            fx=float(rng.uniform(10, 60)),
            fy=float(rng.uniform(10, 60)),
            cx=float(rng.uniform(0, width - 1)),
            cy=float(rng.uniform(0, height - 1)),
            width=width,
            height=height,
        )
        doubled = Intrinsics(
            fx=2 * intr.fx,
            fy=2 * intr.fy,
            cx=2 * intr.cx,
            cy=2 * intr.cy,
            width=2 * width,
            height=2 * height,
        )
        pose_i, pose_j = random_pose(rng, 0.3), random_pose(rng, 0.3)
        z = float(rng.uniform(1.0, 5.0))
        src = [(float(rng.uniform(0, width - 1)), float(rng.uniform(0, height - 1)))]
        dst = [(float(rng.uniform(0, width - 1)), float(rng.uniform(0, height - 1)))]

        small = motion_field(
            _tracks(1, 0, 1, src, dst),
            _aligned(np.full((height, width), z)),
            pose_i,
            pose_j,
            intr,
            0,
            1,
        )
        large = motion_field(
            _tracks(1, 0, 1, [(2 * u, 2 * v) for u, v in src], [(2 * u, 2 * v) for u, v in dst]),
            _aligned(np.full((2 * height, 2 * width), z)),
            pose_i,
            pose_j,
            doubled,
            0,
            1,
        )
        assert len(small) == len(large)
        np.testing.assert_allclose(large.du, small.du, rtol=0, atol=1e-9)
        np.testing.assert_allclose(large.dv, small.dv, rtol=0, atol=1e-9)


def test_scaling_displacements_scales_strength(rng, identity_pose, intr):
    depth = _aligned(np.full((128, 128), 3.0))
    src = [(float(u), float(v)) for u, v in rng.uniform(20, 100, (50, 2))]
    offsets = rng.uniform(-3, 3, (50, 2))

    def strength(k):
        dst = [(u + k * du, v + k * dv) for (u, v), (du, dv) in zip(src, offsets)]
        field = motion_field(_tracks(1, 0, 1, src, dst), depth, identity_pose, identity_pose, intr, 0, 1)
        return object_strength([field])

    assert strength(2.5) == pytest.approx(2.5 * strength(1.0), rel=1e-9)


# Strength reductions


def test_object_strength_examples():
    assert object_strength([]) == 0.0
    assert object_strength([_field([0.0, 0.0], [0.0, 0.0])]) == 0.0
    assert object_strength([_field([0.078125], [0.0])]) == 0.078125


def test_object_strength_summation_oracle(rng):
    du, dv = rng.normal(size=1000), rng.normal(size=1000)
    fields = [_field(du[:400], dv[:400], 0, 1), _field(du[400:], dv[400:], 1, 2)]
    expected = sum(np.hypot(a, b) for a, b in zip(du, dv)) / 1000
    assert object_strength(fields) == pytest.approx(expected, rel=1e-12)
    assert object_strength(fields[::-1]) == pytest.approx(expected, rel=1e-12)


def test_video_strength_and_classification():
    assert video_motion_strength([]) == 0.0
    assert video_motion_strength([(1, 0.001), (2, 0.05)]) == 0.05
    assert video_motion_strength([(2, 0.05), (1, 0.001)]) == 0.05
    assert classify_dynamic(0.0, 0.002) is False
    assert classify_dynamic(0.002, 0.002) is True
    with pytest.raises(ValueError):
        classify_dynamic(0.1, -1.0)


def test_object_motion_sums_skips():
    field = _field([0.1], [0.0])
    motion = object_motion(3, [field, field])
    assert (motion.instance, motion.n_pairs) == (3, 2)
    assert motion.strength == pytest.approx(0.1)


def test_build_motion_report_is_sorted():
    report = build_motion_report(
        "vid",
        [ObjectMotion(instance=2, strength=0.01, n_pairs=4), ObjectMotion(instance=1, strength=0.0, n_pairs=4)],
        0.002,
        [
            FrameAlignment(frame=1, alpha=1.0, beta=0.0, n_sparse=60),
            FrameAlignment(frame=0, alpha=1.0, beta=0.0, n_sparse=60),
        ],
    )
    assert [o.instance for o in report.per_object] == [1, 2]
    assert [a.frame for a in report.per_frame_alignment] == [0, 1]
    assert report.motion_strength == 0.01 and report.is_dynamic


def test_motion_report_invariants():
    with pytest.raises(ValidationError):
        MotionReport(
            video_id="v",
            per_object=[ObjectMotion(instance=1, strength=0.5, n_pairs=1)],
            motion_strength=0.1,
            threshold=0.002,
            is_dynamic=True,
        )
    with pytest.raises(ValidationError):
        MotionReport(video_id="v", motion_strength=0.0, threshold=0.002, is_dynamic=True)


def test_track_invariants():
    point = TrackPoint(frame=0, keypoint_id=0, u=1.0, v=1.0)
    with pytest.raises(ValidationError):
        InstanceTracks(instance_id=1, points=(point, point))
    with pytest.raises(ValidationError):
        InstanceTracks(instance_id=0, points=())


# Camera/object disentanglement on rendered scenes


def _two_object_zoom(velocity, frames=4):
    return SceneConfig(
        seed=11,
        frames=frames,
        camera_path=CameraPathConfig(kind="zoom", speed=0.2),
        objects=[
            ObjectConfig(
                instance_id=1, count=300, box_min=(-1.5, -0.5, 4.5), box_max=(-0.5, 0.5, 5.5)
            ),
            ObjectConfig(
                instance_id=2,
                count=300,
                box_min=(0.5, -0.5, 4.5),
                box_max=(1.5, 0.5, 5.5),
                velocity=velocity,
            ),
        ],
    )


def test_zooming_camera_cancels_for_static_objects():
    render = render_scene(_two_object_zoom((0.0, 0.0, 0.0)))
    strengths = _render_strengths(render)
    assert max(strengths.values()) < 1e-6
    assert classify_dynamic(video_motion_strength(strengths.items()), 0.002) is False


def test_moving_object_dominates_video_strength():
    render = render_scene(_two_object_zoom((0.1, 0.0, 0.0)))
    strengths = _render_strengths(render)
    static_render = render_scene(_two_object_zoom((0.0, 0.0, 0.0)))
    static = max(_render_strengths(static_render).values())

    assert strengths[1] < 1e-6
    assert video_motion_strength(strengths.items()) == strengths[2]
    assert strengths[2] > 100 * max(static, 1e-12)
    assert classify_dynamic(strengths[2], 0.002) is True


def test_depth_noise_keeps_static_object_quiet():
    render = render_scene(_two_object_zoom((0.1, 0.0, 0.0)))
    rng = np.random.default_rng(5)
    noisy = [d * (1.0 + rng.uniform(-0.05, 0.05, d.shape)) for d in render.depth_gt]
    strengths = _render_strengths(render, noisy)
    assert strengths[1] < 0.1 * strengths[2]
