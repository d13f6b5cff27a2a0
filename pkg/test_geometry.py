"""
Pinhole projection, back-projection and Plucker ray tests.
"""

import numpy as np
import pytest
from pydantic import ValidationError

from conftest import points_in_front, random_intrinsics, random_pose
from models.camera import Intrinsics, PluckerRay, Pose
from services.geometry import (
    backproject_pixel,
    backproject_pixels,
    camera_center,
    look_at,
    orthonormalize,
    pixel_ray,
    plucker_from_rays,
    plucker_map,
    plucker_ray,
    project_point,
    project_points,
    round_pixel,
)
from utils.errors import BehindCameraError, GeometryError, InvalidDepthError


def _homogeneous_projection(pose: Pose, intr: Intrinsics, point: np.ndarray):
    extrinsics = np.eye(4)
    extrinsics[:3, :3] = pose.rotation
    extrinsics[:3, 3] = pose.translation
    projection = np.hstack([intr.matrix, np.zeros((3, 1))]) @ extrinsics
    x = projection @ np.append(point, 1.0)
    return x[0] / x[2], x[1] / x[2], x[2]


# Projection


def test_project_point_on_optical_axis(identity_pose, intr):
    assert project_point(identity_pose, intr, np.array([0.0, 0.0, 2.0])) == (64.0, 64.0, 2.0)


def test_project_point_off_axis(identity_pose, intr):
    assert project_point(identity_pose, intr, np.array([1.0, 0.0, 2.0])) == (114.0, 64.0, 2.0)


@pytest.mark.parametrize("z", [0.0, 1e-7, -3.0])
def test_project_point_behind_camera(identity_pose, intr, z):
    with pytest.raises(BehindCameraError):
        project_point(identity_pose, intr, np.array([0.0, 0.0, z]))


def test_project_point_matches_homogeneous_matrix(rng):
    for _ in range(200):
        pose = random_pose(rng)
        intr = random_intrinsics(rng)
        point = points_in_front(rng, pose, 1)[0]
        expected = _homogeneous_projection(pose, intr, point)
        np.testing.assert_allclose(
            project_point(pose, intr, point), expected, rtol=1e-9, atol=1e-9
        )


def test_project_points_reports_depth_without_raising(identity_pose, intr):
    uv, depth = project_points(identity_pose, intr, np.array([[0.0, 0.0, 2.0], [0.0, 0.0, -1.0]]))
    assert depth.tolist() == [2.0, -1.0]
    assert uv[0].tolist() == [64.0, 64.0]


def test_rigid_invariance(rng):
    for _ in range(100):
        pose = random_pose(rng)
        intr = random_intrinsics(rng)
        point = points_in_front(rng, pose, 1)[0]
        world = random_pose(rng)

        moved_point = world.rotation @ point + world.translation
        rotation = pose.rotation @ world.rotation.T
        moved_pose = Pose(
            rotation=orthonormalize(rotation),
            translation=pose.translation - rotation @ world.translation,
        )
        np.testing.assert_allclose(
            project_point(moved_pose, intr, moved_point),
            project_point(pose, intr, point),
            rtol=1e-9,
            atol=1e-9,
        )


# Back-projection


def test_backproject_identity_camera(identity_pose, intr):
    np.testing.assert_array_equal(backproject_pixel(identity_pose, intr, 64, 64, 2), [0, 0, 2])
    np.testing.assert_array_equal(backproject_pixel(identity_pose, intr, 114, 64, 2), [1, 0, 2])


@pytest.mark.parametrize("depth", [0.0, -1.0])
def test_backproject_rejects_non_positive_depth(identity_pose, intr, depth):
    with pytest.raises(InvalidDepthError):
        backproject_pixel(identity_pose, intr, 64, 64, depth)


def test_round_trip_10k(rng):
    pose_count = 100
    for _ in range(pose_count):
        pose = random_pose(rng)
        intr = random_intrinsics(rng)
        points = points_in_front(rng, pose, 10_000 // pose_count)
        uv, depth = project_points(pose, intr, points)
        back = backproject_pixels(pose, intr, uv[:, 0], uv[:, 1], depth)
        np.testing.assert_allclose(back, points, rtol=1e-9, atol=1e-9)


def test_project_after_backproject(rng):
    for _ in range(200):
        pose = random_pose(rng)
        intr = random_intrinsics(rng)
        u = rng.uniform(0, intr.width)
        v = rng.uniform(0, intr.height)
        depth = rng.uniform(0.5, 20.0)
        point = backproject_pixel(pose, intr, u, v, depth)
        np.testing.assert_allclose(
            project_point(pose, intr, point), (u, v, depth), rtol=1e-9, atol=1e-9
        )


# Camera centers and rays


def test_camera_center():
    assert camera_center(Pose.identity()).tolist() == [0.0, 0.0, 0.0]
    pose = Pose(rotation=np.eye(3), translation=[0.0, 0.0, -5.0])
    assert camera_center(pose).tolist() == [0.0, 0.0, 5.0]


def test_camera_center_maps_to_camera_origin(rng):
    for _ in range(100):
        pose = random_pose(rng)
        center = camera_center(pose)
        np.testing.assert_allclose(pose.rotation @ center + pose.translation, 0.0, atol=1e-12)


def test_pixel_ray_through_principal_point(rng, intr):
    origin, direction = pixel_ray(Pose.identity(), intr, intr.cx, intr.cy)
    np.testing.assert_array_equal(direction, [0.0, 0.0, 1.0])
    np.testing.assert_array_equal(origin, [0.0, 0.0, 0.0])

    pose = random_pose(rng)
    _, direction = pixel_ray(pose, intr, intr.cx, intr.cy)
    np.testing.assert_allclose(direction, pose.rotation[2], atol=1e-12)


def test_points_on_pixel_ray_reproject(rng):
    for _ in range(100):
        pose = random_pose(rng)
        intr = random_intrinsics(rng)
        u, v = rng.uniform(0, intr.width), rng.uniform(0, intr.height)
        origin, direction = pixel_ray(pose, intr, u, v)
        point = origin + rng.uniform(0.5, 20.0) * direction
        pu, pv, _ = project_point(pose, intr, point)
        assert abs(pu - u) < 1e-6 and abs(pv - v) < 1e-6


def test_look_at_centers_target(rng, intr):
    for _ in range(50):
        eye = rng.uniform(-5, 5, 3)
        target = rng.uniform(-1, 1, 3)
        pose = look_at(eye, target)
        u, v, depth = project_point(pose, intr, target)
        assert abs(u - intr.cx) < 1e-6 and abs(v - intr.cy) < 1e-6
        assert depth == pytest.approx(np.linalg.norm(target - eye))
        np.testing.assert_allclose(camera_center(pose), eye, atol=1e-9)


def test_look_at_degenerate_inputs():
    with pytest.raises(GeometryError):
        look_at([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    with pytest.raises(GeometryError):
        look_at([0.0, 0.0, 0.0], [0.0, 5.0, 0.0])


def test_orthonormalize_repairs_noise(rng):
    noisy = random_pose(rng).rotation + rng.normal(0, 1e-4, (3, 3))
    fixed = orthonormalize(noisy)
    np.testing.assert_allclose(fixed.T @ fixed, np.eye(3), atol=1e-12)
    assert np.linalg.det(fixed) == pytest.approx(1.0, abs=1e-12)


def test_round_pixel_half_up():
    assert round_pixel(0.5) == 1
    assert round_pixel(-0.5) == 0
    assert round_pixel(1.49) == 1
    assert round_pixel(np.array([2.5, -1.5, 3.0])).tolist() == [3, -1, 3]


# Plucker rays


def test_plucker_ray_principal_point_identity(intr):
    ray = plucker_ray(Pose.identity(), intr, intr.cx, intr.cy)
    assert ray.vector.tolist() == [0.0, 0.0, 1.0, 0.0, 0.0, 0.0]


def test_moment_invariant_along_ray(rng):
    origins = rng.uniform(-5, 5, (1000, 3))
    directions = rng.normal(size=(1000, 3))
    shifts = rng.uniform(-10, 10, (1000, 1))
    unit = directions / np.linalg.norm(directions, axis=1, keepdims=True)

    base = plucker_from_rays(origins, directions)
    shifted = plucker_from_rays(origins + shifts * unit, directions)
    np.testing.assert_allclose(shifted, base, atol=1e-9)


def test_plucker_constraint_random(rng):
    for _ in range(200):
        pose = random_pose(rng)
        intr = random_intrinsics(rng)
        ray = plucker_ray(pose, intr, rng.uniform(0, intr.width), rng.uniform(0, intr.height))
        assert abs(ray.direction @ ray.moment) < 1e-9


def test_plucker_map_single_pixel():
    intr = Intrinsics(fx=1.0, fy=1.0, cx=0.0, cy=0.0, width=1, height=1)
    raster = plucker_map(Pose.identity(), intr)
    assert raster.shape == (1, 1, 6)
    assert raster[0, 0].tolist() == [0.0, 0.0, 1.0, 0.0, 0.0, 0.0]


def test_plucker_map_matches_per_pixel_rays(rng):
    pose = random_pose(rng)
    intr = Intrinsics(fx=3.0, fy=2.5, cx=1.5, cy=2.0, width=4, height=4)
    raster = plucker_map(pose, intr)
    for v in range(4):
        for u in range(4):
            np.testing.assert_array_equal(raster[v, u], plucker_ray(pose, intr, u, v).vector)


def test_plucker_map_validity_ten_frames(rng):
    intr = Intrinsics(fx=60.0, fy=60.0, cx=32.0, cy=32.0, width=64, height=64)
    for _ in range(10):
        raster = plucker_map(random_pose(rng), intr)
        d, m = raster[..., :3], raster[..., 3:]
        np.testing.assert_allclose(np.linalg.norm(d, axis=-1), 1.0, atol=1e-9)
        assert np.abs(np.sum(d * m, axis=-1)).max() < 1e-9


def test_rotated_camera_keeps_moment_magnitudes(rng, intr):
    center = rng.uniform(-3, 3, 3)
    a = random_pose(rng).rotation
    b = random_pose(rng).rotation
    pose_a = Pose(rotation=a, translation=-a @ center)
    pose_b = Pose(rotation=b, translation=-b @ center)

    # the same world direction seen by both cameras
    ray_a = plucker_ray(pose_a, intr, 40.0, 70.0)
    direction_b = b @ ray_a.direction
    u = intr.fx * direction_b[0] / direction_b[2] + intr.cx
    v = intr.fy * direction_b[1] / direction_b[2] + intr.cy
    ray_b = plucker_ray(pose_b, intr, u, v)
    if direction_b[2] > 0:
        np.testing.assert_allclose(ray_b.direction, ray_a.direction, atol=1e-9)
        assert np.linalg.norm(ray_b.moment) == pytest.approx(np.linalg.norm(ray_a.moment), abs=1e-9)


# Model invariants


def test_intrinsics_invariants():
    with pytest.raises(ValidationError):
        Intrinsics(fx=0.0, fy=1.0, cx=0.0, cy=0.0, width=4, height=4)
    with pytest.raises(ValidationError):
        Intrinsics(fx=1.0, fy=1.0, cx=4.0, cy=0.0, width=4, height=4)
    with pytest.raises(ValidationError):
        Intrinsics(fx=1.0, fy=1.0, cx=0.0, cy=0.0, width=0, height=4)


def test_pose_invariants():
    with pytest.raises(ValidationError):
        Pose(rotation=np.diag([1.0, 1.0, 2.0]), translation=np.zeros(3))
    with pytest.raises(ValidationError):
        Pose(rotation=np.diag([1.0, 1.0, -1.0]), translation=np.zeros(3))
    with pytest.raises(ValidationError):
        Pose(rotation=np.eye(3), translation=[0.0, np.nan, 0.0])

    pose = Pose.identity()
    with pytest.raises(ValueError):
        pose.rotation[0, 0] = 2.0


def test_quaternion_boundary(rng):
    assert Pose.from_quaternion((1, 0, 0, 0), (0, 0, 0)).rotation.tolist() == np.eye(3).tolist()
    for _ in range(50):
        pose = random_pose(rng)
        qvec = pose.quaternion
        assert qvec[0] >= 0
        back = Pose.from_quaternion(qvec, pose.translation)
        np.testing.assert_allclose(back.rotation, pose.rotation, atol=1e-12)


def test_plucker_ray_validation():
    with pytest.raises(ValidationError):
        PluckerRay(direction=[0.0, 0.0, 2.0], moment=[0.0, 0.0, 0.0])
    with pytest.raises(ValidationError):
        PluckerRay(direction=[0.0, 0.0, 1.0], moment=[0.0, 0.0, 1.0])
