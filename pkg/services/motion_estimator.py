"""
Object motion field and motion strength.

A keypoint tracked at (u_i, v_i) in frame i is lifted with the aligned depth,
reprojected into frame j and compared with its tracked position there:

    (du, dv) = ((u_j - u_ij) / W, (v_j - v_ij) / H)

Camera motion cancels for static points, so what remains is object motion.
"""

import logging
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from models.camera import Intrinsics, Pose
from models.depth import DepthMap
from models.motion import (
    FrameAlignment,
    InstanceTracks,
    MotionField,
    MotionReport,
    ObjectMotion,
    SkipCounts,
)
from services.geometry import EPS_Z, backproject_pixels, project_points, round_pixel

logger = logging.getLogger(__name__)


def sample_keypoints(mask: np.ndarray, instance_id: int, grid_step: int) -> List[Tuple[int, int]]:
    """Grid positions (c * step, r * step) covered by the instance, row-major"""
    if grid_step < 1:
        raise ValueError("grid_step must be >= 1")
    grid = np.asarray(mask)[::grid_step, ::grid_step]
    rows, cols = np.nonzero(grid == instance_id)
    return [(int(c) * grid_step, int(r) * grid_step) for r, c in zip(rows, cols)]


def _in_image(uv: np.ndarray, width: int, height: int) -> np.ndarray:
    cols = round_pixel(uv[:, 0]).reshape(-1)
    rows = round_pixel(uv[:, 1]).reshape(-1)
    return (cols >= 0) & (cols < width) & (rows >= 0) & (rows < height)


def motion_field(
    tracks: InstanceTracks,
    depth_i: DepthMap,
    pose_i: Pose,
    pose_j: Pose,
    intr: Intrinsics,
    frame_i: int,
    frame_j: int,
    eps_z: float = EPS_Z,
) -> MotionField:
    if frame_i == frame_j:
        raise ValueError("motion field needs two distinct frames")

    source = tracks.at_frame(frame_i)
    target = tracks.at_frame(frame_j)

    invisible = 0
    ids, src_uv, dst_uv = [], [], []
    for keypoint_id in sorted(source):
        p = source[keypoint_id]
        q = target.get(keypoint_id)
        if not p.visible or q is None or not q.visible:
            invisible += 1
            continue
        ids.append(keypoint_id)
        src_uv.append((p.u, p.v))
        dst_uv.append((q.u, q.v))

    ids = np.array(ids, dtype=np.int64)
    src_uv = np.array(src_uv, dtype=np.float64).reshape(-1, 2)
    dst_uv = np.array(dst_uv, dtype=np.float64).reshape(-1, 2)

    in_image = _in_image(src_uv, intr.width, intr.height) & _in_image(
        dst_uv, intr.width, intr.height
    )
    out_of_bounds = int((~in_image).sum())

    # depth lookup at the rounded pixel, no interpolation across object borders
    cols = round_pixel(src_uv[:, 0]).reshape(-1)
    rows = round_pixel(src_uv[:, 1]).reshape(-1)
    inside = in_image & _in_image(src_uv, depth_i.width, depth_i.height)
    z = np.zeros(len(ids))
    z[inside] = depth_i.values[rows[inside], cols[inside]]
    usable = inside & (z > 0)
    bad_depth = int((in_image & ~usable).sum())

    world = backproject_pixels(
        pose_i, intr, src_uv[usable, 0], src_uv[usable, 1], z[usable]
    )
    reprojected, depth_j = project_points(pose_j, intr, world)
    in_front = depth_j > eps_z
    behind_camera = int((~in_front).sum())

    observed = dst_uv[usable][in_front]
    predicted = reprojected[in_front]
    field = MotionField(
        instance_id=tracks.instance_id,
        frame_i=frame_i,
        frame_j=frame_j,
        keypoint_ids=ids[usable][in_front],
        du=(observed[:, 0] - predicted[:, 0]) / intr.width,
        dv=(observed[:, 1] - predicted[:, 1]) / intr.height,
        skipped=SkipCounts(
            invisible=invisible,
            bad_depth=bad_depth,
            behind_camera=behind_camera,
            out_of_bounds=out_of_bounds,
        ),
    )
    logger.debug(
        "instance %d frames %d->%d: %d pairs, skipped %s",
        tracks.instance_id,
        frame_i,
        frame_j,
        len(field),
        field.skipped.model_dump(),
    )
    return field


def object_strength(fields: Iterable[MotionField]) -> float:
    """Mean |(du, dv)| over every (keypoint, frame pair) entry"""
    magnitudes = [f.magnitudes for f in fields if len(f)]
    if not magnitudes:
        return 0.0
    return float(np.mean(np.concatenate(magnitudes)))


def object_motion(instance_id: int, fields: Sequence[MotionField]) -> ObjectMotion:
    skipped = SkipCounts()
    for field in fields:
        skipped = skipped + field.skipped
    return ObjectMotion(
        instance=instance_id,
        strength=object_strength(fields),
        n_pairs=sum(len(f) for f in fields),
        skipped=skipped,
    )


def video_motion_strength(per_object: Iterable[Tuple[int, float]]) -> float:
    return max((float(strength) for _, strength in per_object), default=0.0)


def classify_dynamic(strength: float, threshold: float) -> bool:
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    return strength >= threshold


def build_motion_report(
    video_id: str,
    objects: Iterable[ObjectMotion],
    threshold: float,
    alignments: Iterable[FrameAlignment] = (),
) -> MotionReport:
    objects = sorted(objects, key=lambda o: o.instance)
    strength = video_motion_strength((o.instance, o.strength) for o in objects)
    return MotionReport(
        video_id=video_id,
        per_object=objects,
        motion_strength=strength,
        threshold=threshold,
        is_dynamic=classify_dynamic(strength, threshold),
        per_frame_alignment=sorted(alignments, key=lambda a: a.frame),
    )
