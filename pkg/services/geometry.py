"""
Pinhole camera model.

Conventions:
    P_camera = R @ P_world + t            (world -> camera)
    (u, v) = (fx * X_c / Z_c + cx, fy * Y_c / Z_c + cy)
    integer pixel (i, j) is the sample point (i, j), no half-pixel offset
    Plucker ray r = <d, o x d> with unit d and o the camera center
"""

from typing import Tuple, Union

import numpy as np

from models.camera import Intrinsics, PluckerRay, Pose
from utils.errors import BehindCameraError, GeometryError, InvalidDepthError

EPS_Z = 1e-6
WORLD_UP = np.array([0.0, 1.0, 0.0])

ArrayLike = Union[np.ndarray, float]


def round_pixel(x: ArrayLike) -> Union[np.ndarray, int]:
    """Round half up; the one binning rule for depth lookups and splatting"""
    rounded = np.floor(np.asarray(x, dtype=np.float64) + 0.5).astype(np.int64)
    return int(rounded) if rounded.ndim == 0 else rounded


def project_points(
    pose: Pose, intr: Intrinsics, points: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized projection. Returns (N x 2 pixel coords, N depths); no depth check"""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    camera = points @ pose.rotation.T + pose.translation
    depth = camera[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = intr.fx * camera[:, 0] / depth + intr.cx
        v = intr.fy * camera[:, 1] / depth + intr.cy
    return np.stack([u, v], axis=1), depth


def project_point(
    pose: Pose, intr: Intrinsics, point: np.ndarray, eps_z: float = EPS_Z
) -> Tuple[float, float, float]:
    uv, depth = project_points(pose, intr, point)
    if not depth[0] > eps_z:
        raise BehindCameraError(float(depth[0]), eps_z)
    return float(uv[0, 0]), float(uv[0, 1]), float(depth[0])


def backproject_pixels(
    pose: Pose, intr: Intrinsics, u: np.ndarray, v: np.ndarray, depth: np.ndarray
) -> np.ndarray:
    """Vectorized back-projection into world space (depth positivity is the caller's job)"""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    depth = np.asarray(depth, dtype=np.float64)
    camera = np.stack(
        [
            depth * (u - intr.cx) / intr.fx,
            depth * (v - intr.cy) / intr.fy,
            depth,
        ],
        axis=-1,
    )
    return (camera - pose.translation) @ pose.rotation


def backproject_pixel(
    pose: Pose, intr: Intrinsics, u: float, v: float, depth: float
) -> np.ndarray:
    # K^-1 lifts to camera space, then R^T (p - t) moves the point to world space
    if not depth > 0:
        raise InvalidDepthError(depth)
    return backproject_pixels(pose, intr, np.array([u]), np.array([v]), np.array([depth]))[0]


def camera_center(pose: Pose) -> np.ndarray:
    return -pose.rotation.T @ pose.translation


def _ray_directions(
    pose: Pose, intr: Intrinsics, u: np.ndarray, v: np.ndarray
) -> np.ndarray:
    x = (np.asarray(u, dtype=np.float64) - intr.cx) / intr.fx
    y = (np.asarray(v, dtype=np.float64) - intr.cy) / intr.fy
    r = pose.rotation
    # R^T @ (x, y, 1) written out so every element takes the same arithmetic path
    dx = r[0, 0] * x + r[1, 0] * y + r[2, 0]
    dy = r[0, 1] * x + r[1, 1] * y + r[2, 1]
    dz = r[0, 2] * x + r[1, 2] * y + r[2, 2]
    norm = np.sqrt(dx * dx + dy * dy + dz * dz)
    return np.stack([dx / norm, dy / norm, dz / norm], axis=-1)


def pixel_ray(
    pose: Pose, intr: Intrinsics, u: float, v: float
) -> Tuple[np.ndarray, np.ndarray]:
    direction = _ray_directions(pose, intr, np.array([u]), np.array([v]))[0]
    return camera_center(pose), direction


def plucker_from_rays(origin: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """<d, o x d> for arrays of rays; d is normalized first"""
    direction = np.asarray(direction, dtype=np.float64)
    norm = np.sqrt(np.sum(direction * direction, axis=-1, keepdims=True))
    direction = direction / norm
    moment = np.cross(np.asarray(origin, dtype=np.float64), direction)
    return np.concatenate([direction, moment], axis=-1)


def plucker_rays(
    pose: Pose, intr: Intrinsics, u: np.ndarray, v: np.ndarray
) -> np.ndarray:
    directions = _ray_directions(pose, intr, u, v)
    moments = np.cross(camera_center(pose), directions)
    return np.concatenate([directions, moments], axis=-1)


def plucker_ray(pose: Pose, intr: Intrinsics, u: float, v: float) -> PluckerRay:
    ray = plucker_rays(pose, intr, np.array([u]), np.array([v]))[0]
    return PluckerRay(direction=ray[:3], moment=ray[3:])


def plucker_map(pose: Pose, intr: Intrinsics) -> np.ndarray:
    """H x W x 6 map, channels (d_x, d_y, d_z, m_x, m_y, m_z)"""
    v, u = np.mgrid[0 : intr.height, 0 : intr.width].astype(np.float64)
    return plucker_rays(pose, intr, u, v)


def orthonormalize(rotation: np.ndarray) -> np.ndarray:
    u, _, vt = np.linalg.svd(np.asarray(rotation, dtype=np.float64))
    if np.linalg.det(u @ vt) < 0:
        u[:, -1] *= -1
    return u @ vt


def look_at(eye: np.ndarray, target: np.ndarray, up: np.ndarray = WORLD_UP) -> Pose:
    """Camera at `eye` whose optical axis (third rotation row) points at `target`"""
    eye = np.asarray(eye, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - eye
    distance = np.linalg.norm(forward)
    if distance == 0:
        raise GeometryError("look_at target coincides with the camera position")
    forward = forward / distance
    right = np.cross(forward, up)
    right_norm = np.linalg.norm(right)
    if right_norm < 1e-12:
        raise GeometryError("look_at direction is parallel to the up vector")
    right = right / right_norm
    down = np.cross(forward, right)
    rotation = orthonormalize(np.stack([right, down, forward]))
    return Pose(rotation=rotation, translation=-rotation @ eye)
