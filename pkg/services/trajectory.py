"""
Camera trajectories for conditioning: orbits around a target and dense paths
interpolated between anchor poses.
"""

import logging
import math
from typing import List, Optional, Sequence

import numpy as np
from scipy.spatial.transform import Rotation, Slerp

from models.camera import Intrinsics, Pose
from models.sfm import SfmCamera, SfmFrame, SfmModel
from models.trajectory import Trajectory
from services.geometry import camera_center, look_at, orthonormalize
from utils.errors import TrajectoryError

logger = logging.getLogger(__name__)

DEFAULT_INTRINSICS = Intrinsics(fx=280.0, fy=280.0, cx=128.0, cy=128.0, width=256, height=256)


def frame_names(count: int, prefix: str = "frame", suffix: str = "") -> List[str]:
    """Zero-padded names whose lexical order matches index order"""
    width = max(4, len(str(count - 1)))
    return [f"{prefix}_{k:0{width}d}{suffix}" for k in range(count)]


def orbit_trajectory(
    center: Sequence[float],
    radius: float,
    elevation: float,
    n: int,
    intr: Intrinsics = DEFAULT_INTRINSICS,
    start_azimuth: float = 0.0,
    arc: float = 2 * math.pi,
) -> Trajectory:
    """n cameras on a circle at `elevation` (radians), all looking at `center`"""
    if not radius > 0:
        raise TrajectoryError(f"orbit radius must be positive, got {radius}")
    if not abs(elevation) < math.pi / 2:
        raise TrajectoryError(f"orbit elevation must lie in (-pi/2, pi/2), got {elevation}")
    if n < 1:
        raise TrajectoryError(f"orbit needs at least one camera, got {n}")

    center = np.asarray(center, dtype=np.float64)
    poses = []
    for k in range(n):
        azimuth = start_azimuth + arc * k / n
        offset = np.array(
            [
                math.cos(elevation) * math.cos(azimuth),
                math.sin(elevation),
                math.cos(elevation) * math.sin(azimuth),
            ]
        )
        poses.append(look_at(center + radius * offset, center))
    return Trajectory(poses=tuple(poses), intr=intr)


def interpolate_pose(a: Pose, b: Pose, t: float) -> Pose:
    """Slerp the rotation, lerp the camera center, rebuild t = -R c"""
    if not 0.0 <= t <= 1.0:
        raise TrajectoryError(f"interpolation parameter must lie in [0, 1], got {t}")
    if t == 0.0:
        return a
    if t == 1.0:
        return b

    rotations = Rotation.from_matrix(np.stack([a.rotation, b.rotation]))
    rotation = orthonormalize(Slerp([0.0, 1.0], rotations)([t]).as_matrix()[0])
    center = (1.0 - t) * camera_center(a) + t * camera_center(b)
    return Pose(rotation=rotation, translation=-rotation @ center)


def densify_trajectory(
    anchors: Sequence[Pose], per_segment: int, intr: Intrinsics = DEFAULT_INTRINSICS
) -> Trajectory:
    """Piecewise interpolation between consecutive anchors; anchors are kept verbatim"""
    if len(anchors) < 2:
        raise TrajectoryError(f"densify needs at least 2 anchors, got {len(anchors)}")
    if per_segment < 1:
        raise TrajectoryError(f"per_segment must be >= 1, got {per_segment}")

    poses = [anchors[0]]
    for a, b in zip(anchors, anchors[1:]):
        for k in range(1, per_segment + 1):
            poses.append(b if k == per_segment else interpolate_pose(a, b, k / per_segment))
    logger.debug("densified %d anchors into %d poses", len(anchors), len(poses))
    return Trajectory(poses=tuple(poses), intr=intr)


def jitter_trajectory(
    trajectory: Trajectory,
    translation_sigma: float,
    rotation_sigma: float,
    seed: Optional[int] = None,
) -> Trajectory:
    """Perturb camera centers (world units) and orientations (radians)"""
    rng = np.random.default_rng(seed)
    poses = []
    for pose in trajectory.poses:
        delta = Rotation.from_rotvec(rng.normal(0.0, rotation_sigma, 3)).as_matrix()
        rotation = orthonormalize(delta @ pose.rotation)
        center = camera_center(pose) + rng.normal(0.0, translation_sigma, 3)
        poses.append(Pose(rotation=rotation, translation=-rotation @ center))
    return Trajectory(poses=tuple(poses), intr=trajectory.intr)


def trajectory_to_model(trajectory: Trajectory, name_prefix: str = "frame") -> SfmModel:
    """COLMAP model with one PINHOLE camera and no points"""
    camera = SfmCamera.from_intrinsics(1, trajectory.intr)
    names = frame_names(len(trajectory.poses), name_prefix, ".png")
    frames = [
        SfmFrame(
            image_id=k + 1,
            name=names[k],
            camera_id=camera.camera_id,
            qvec=tuple(float(q) for q in pose.quaternion),
            tvec=tuple(float(x) for x in pose.translation),
        )
        for k, pose in enumerate(trajectory.poses)
    ]
    return SfmModel(cameras={camera.camera_id: camera}, frames=frames)


def trajectory_from_model(model: SfmModel) -> Trajectory:
    if not model.frames:
        raise TrajectoryError("model has no frames")
    intrinsics = {model.intrinsics_for(frame) for frame in model.frames}
    if len(intrinsics) != 1:
        raise TrajectoryError("frames use cameras with different intrinsics")
    return Trajectory(poses=tuple(f.pose for f in model.frames), intr=intrinsics.pop())
