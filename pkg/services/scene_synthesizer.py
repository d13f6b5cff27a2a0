"""
Synthetic scene bundles with known ground truth.

Points are splatted through a z-buffer with the same pixel convention as the
annotation pipeline (round-half-up, nearest point wins). The analytic motion
strength is computed with this module's own homogeneous projection so it can
be used as an independent oracle for the pipeline.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Union

import numpy as np
import yaml
from pydantic import ValidationError

from models.camera import Intrinsics, Pose
from models.depth import DepthKind, DepthMap
from models.motion import InstanceTracks, TrackPoint
from models.scene import (
    CameraPathConfig,
    DepthCorruption,
    ObjectConfig,
    SceneConfig,
)
from models.sfm import SfmCamera, SfmFrame, SfmModel, SparseCloud
from models.trajectory import Trajectory
from services.colmap_io import serialize_colmap_text
from services.raster_io import write_pfm, write_pgm_mask
from services.tracks_io import write_tracks_jsonl
from services.trajectory import frame_names, jitter_trajectory, orbit_trajectory
from utils.config import DEFAULT_FRAME_GAP
from utils.errors import SceneGenerationError
from utils.jsonio import write_json

logger = logging.getLogger(__name__)

EPS_Z = 1e-6
NO_OWNER = -1

PathLike = Union[str, Path]


@dataclass(frozen=True)
class SceneRender:
    config: SceneConfig
    poses: List[Pose]
    frame_names: List[str]
    depth_gt: List[np.ndarray]
    depth_rel: List[np.ndarray]
    masks: List[np.ndarray]
    normalization: List[Dict[str, float]]
    tracks: List[InstanceTracks]
    background: np.ndarray
    # instance id -> (frames, N, 3) world positions and (frames, N) visibility
    object_positions: Dict[int, np.ndarray] = field(default_factory=dict)
    object_visibility: Dict[int, np.ndarray] = field(default_factory=dict)


@dataclass(frozen=True)
class SceneBundle:
    root: Path
    sparse_dir: Path
    depth_dir: Path
    gt_depth_dir: Path
    mask_dir: Path
    tracks_path: Path
    ground_truth_path: Path
    analytic_strength: Dict[int, float]


def _preset_objects(velocity=(0.0, 0.0, 0.0), rotation_rate=0.0) -> List[ObjectConfig]:
    return [ObjectConfig(instance_id=1, velocity=velocity, rotation_rate=rotation_rate)]


PRESETS: Dict[str, SceneConfig] = {
    "static": SceneConfig(objects=_preset_objects()),
    "zoom": SceneConfig(
        camera_path=CameraPathConfig(kind="zoom", speed=0.2),
        objects=_preset_objects(),
    ),
    "moving": SceneConfig(
        camera_path=CameraPathConfig(kind="linear", velocity=(0.05, 0.0, 0.0)),
        objects=_preset_objects(velocity=(0.1, 0.0, 0.0), rotation_rate=0.05),
    ),
    "orbit": SceneConfig(
        camera_path=CameraPathConfig(kind="orbit", step=0.02),
        objects=_preset_objects(velocity=(0.0, 0.05, 0.0)),
    ),
}


def preset_config(name: str, **overrides) -> SceneConfig:
    if name not in PRESETS:
        raise SceneGenerationError(f"unknown preset '{name}', expected one of {sorted(PRESETS)}")
    return PRESETS[name].model_copy(update=overrides)


def load_scene_config(path: PathLike) -> SceneConfig:
    path = Path(path)
    try:
        with open(path, "r") as f:
            data = yaml.safe_load(f) or {}
        return SceneConfig.model_validate(data)
    except (OSError, yaml.YAMLError, ValidationError) as e:
        raise SceneGenerationError(f"cannot load scene config {path}: {e}") from e


def camera_poses(path: CameraPathConfig, frames: int, intr: Intrinsics, seed: int) -> List[Pose]:
    if path.kind == "orbit":
        poses = list(
            orbit_trajectory(
                center=path.target,
                radius=path.radius,
                elevation=0.0,
                n=frames,
                intr=intr,
                start_azimuth=-math.pi / 2,
                arc=path.step * frames,
            ).poses
        )
    else:
        if path.kind == "linear":
            step = np.asarray(path.velocity, dtype=np.float64)
        elif path.kind == "zoom":
            step = np.array([0.0, 0.0, path.speed])
        else:
            step = np.zeros(3)
        poses = [Pose(rotation=np.eye(3), translation=-step * f) for f in range(frames)]

    if path.translation_jitter > 0 or path.rotation_jitter > 0:
        jittered = jitter_trajectory(
            Trajectory(poses=tuple(poses), intr=intr),
            path.translation_jitter,
            path.rotation_jitter,
            seed=seed + 1,
        )
        poses = list(jittered.poses)
    return poses


def _yaw(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def object_positions(obj: ObjectConfig, base: np.ndarray, frames: int) -> np.ndarray:
    """World positions per frame: c0 + v f + R_y(w f) (p - c0)"""
    center = np.asarray(obj.box_center, dtype=np.float64)
    velocity = np.asarray(obj.velocity, dtype=np.float64)
    local = base - center
    return np.stack(
        [center + velocity * f + local @ _yaw(obj.rotation_rate * f).T for f in range(frames)]
    )


def _sample_box(rng: np.random.Generator, box, count: int) -> np.ndarray:
    return rng.uniform(box.box_min, box.box_max, size=(count, 3))


def _camera_coordinates(pose: Pose, points: np.ndarray) -> np.ndarray:
    homogeneous = np.concatenate([points, np.ones((len(points), 1))], axis=1)
    return (homogeneous @ pose.matrix.T)[:, :3]


def _project(pose: Pose, intr: Intrinsics, points: np.ndarray):
    """Homogeneous pinhole projection; returns (u, v, z)"""
    camera = _camera_coordinates(pose, points)
    z = camera[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        pixels = camera @ intr.matrix.T
        u = pixels[:, 0] / z
        v = pixels[:, 1] / z
    return u, v, z


def _splat(u: np.ndarray, v: np.ndarray, z: np.ndarray, intr: Intrinsics):
    """Z-buffer: returns (depth raster, owner raster, per-point visibility)"""
    depth = np.zeros((intr.height, intr.width), dtype=np.float64)
    owner = np.full((intr.height, intr.width), NO_OWNER, dtype=np.int64)
    visible = np.zeros(len(z), dtype=bool)

    with np.errstate(invalid="ignore"):
        cols = np.floor(u + 0.5)
        rows = np.floor(v + 0.5)
        ok = (
            np.isfinite(z)
            & (z > EPS_Z)
            & np.isfinite(cols)
            & np.isfinite(rows)
            & (cols >= 0)
            & (cols < intr.width)
            & (rows >= 0)
            & (rows < intr.height)
        )
    index = np.flatnonzero(ok)
    if len(index) == 0:
        return depth, owner, visible

    flat = rows[index].astype(np.int64) * intr.width + cols[index].astype(np.int64)
    order = np.lexsort((z[index], flat))
    first = np.ones(len(order), dtype=bool)
    first[1:] = flat[order][1:] != flat[order][:-1]
    winners = index[order][first]
    winner_pixels = flat[order][first]

    depth.reshape(-1)[winner_pixels] = z[winners]
    owner.reshape(-1)[winner_pixels] = winners
    visible[winners] = True
    return depth, owner, visible


def _corrupt_depth(
    depth_gt: np.ndarray, corruption: DepthCorruption, noise: float, rng: np.random.Generator
):
    covered = depth_gt > 0
    relative = np.zeros_like(depth_gt)
    if not covered.any():
        raise SceneGenerationError("frame has no covered pixels")

    values = (depth_gt[covered] - corruption.b) / corruption.a
    if noise > 0:
        values = values * (1.0 + noise * rng.standard_normal(values.shape))

    hi = float(values.max())
    lo = float(values.min()) if corruption.normalize == "minmax" else 0.0
    if not hi > lo:
        raise SceneGenerationError(
            f"cannot {corruption.normalize}-normalize depth with range [{lo}, {hi}]"
        )
    relative[covered] = (values - lo) / (hi - lo)
    if relative.min() < 0.0 or relative.max() > 1.0:
        raise SceneGenerationError("relative depth falls outside [0, 1]; check depth_corruption.b")
    return relative, {"lo": lo, "hi": hi}


def render_scene(config: SceneConfig) -> SceneRender:
    """Render every frame in float64 without touching the filesystem"""
    rng = np.random.default_rng(config.seed)
    intr = config.intr

    background = _sample_box(rng, config.background, config.background.count)
    bases = [_sample_box(rng, obj, obj.count) for obj in config.objects]
    positions = {
        obj.instance_id: object_positions(obj, base, config.frames)
        for obj, base in zip(config.objects, bases)
    }
    noise_rng = np.random.default_rng(config.seed + 2)
    poses = camera_poses(config.camera_path, config.frames, intr, config.seed)

    depth_gt, depth_rel, masks, normalization = [], [], [], []
    visibility = {
        obj.instance_id: np.zeros((config.frames, obj.count), dtype=bool)
        for obj in config.objects
    }
    points: Dict[int, List[TrackPoint]] = {obj.instance_id: [] for obj in config.objects}

    for f, pose in enumerate(poses):
        # background first, then objects in config order
        world = np.concatenate(
            [background] + [positions[o.instance_id][f] for o in config.objects]
        )
        u, v, z = _project(pose, intr, world)
        depth, owner, visible = _splat(u, v, z, intr)

        mask = np.zeros((intr.height, intr.width), dtype=np.uint8)
        offset = len(background)
        for obj in config.objects:
            span = slice(offset, offset + obj.count)
            mask[(owner >= span.start) & (owner < span.stop)] = obj.instance_id
            seen = visible[span]
            if not seen.any():
                raise SceneGenerationError(
                    f"object {obj.instance_id} has no visible points in frame {f}"
                )
            visibility[obj.instance_id][f] = seen
            for k in range(obj.count):
                i = offset + k
                if z[i] > EPS_Z:
                    points[obj.instance_id].append(
                        TrackPoint(
                            frame=f,
                            keypoint_id=k,
                            u=float(u[i]),
                            v=float(v[i]),
                            visible=bool(seen[k]),
                        )
                    )
            offset = span.stop

        relative, norm = _corrupt_depth(
            depth, config.depth_corruption, config.depth_noise, noise_rng
        )
        depth_gt.append(depth)
        depth_rel.append(relative)
        masks.append(mask)
        normalization.append(norm)

    tracks = [
        InstanceTracks(instance_id=obj.instance_id, points=tuple(points[obj.instance_id]))
        for obj in sorted(config.objects, key=lambda o: o.instance_id)
    ]
    return SceneRender(
        config=config,
        poses=poses,
        frame_names=frame_names(config.frames),
        depth_gt=depth_gt,
        depth_rel=depth_rel,
        masks=masks,
        normalization=normalization,
        tracks=tracks,
        background=background,
        object_positions=positions,
        object_visibility=visibility,
    )


def analytic_strength(
    config_or_render: Union[SceneConfig, SceneRender], frame_gap: int = DEFAULT_FRAME_GAP
) -> Dict[int, float]:
    """
    Ground-truth motion strength per instance: mean normalized displacement
    between where a point would be if it had stayed put and where it went.
    """
    render = (
        config_or_render
        if isinstance(config_or_render, SceneRender)
        else render_scene(config_or_render)
    )
    intr = render.config.intr
    strengths = {}
    for instance_id in sorted(render.object_positions):
        positions = render.object_positions[instance_id]
        visibility = render.object_visibility[instance_id]
        magnitudes = []
        for i in range(len(render.poses) - frame_gap):
            j = i + frame_gap
            both = visibility[i] & visibility[j]
            if not both.any():
                continue
            u_ij, v_ij, z_ij = _project(render.poses[j], intr, positions[i][both])
            u_j, v_j, _ = _project(render.poses[j], intr, positions[j][both])
            front = z_ij > EPS_Z
            du = (u_j[front] - u_ij[front]) / intr.width
            dv = (v_j[front] - v_ij[front]) / intr.height
            magnitudes.append(np.sqrt(du * du + dv * dv))
        flat = np.concatenate(magnitudes) if magnitudes else np.zeros(0)
        strengths[instance_id] = float(flat.mean()) if len(flat) else 0.0
    return strengths


def _sfm_model(render: SceneRender) -> SfmModel:
    camera = SfmCamera.from_intrinsics(1, render.config.intr)
    frames = [
        SfmFrame(
            image_id=f + 1,
            name=f"{name}.png",
            camera_id=camera.camera_id,
            qvec=tuple(float(q) for q in pose.quaternion),
            tvec=tuple(float(x) for x in pose.translation),
        )
        for f, (name, pose) in enumerate(zip(render.frame_names, render.poses))
    ]
    return SfmModel(
        cameras={camera.camera_id: camera},
        frames=frames,
        cloud=SparseCloud.from_positions(render.background),
    )


def generate_scene(
    config: SceneConfig, out_dir: PathLike, frame_gap: int = DEFAULT_FRAME_GAP
) -> SceneBundle:
    """
    Write a video bundle:

        sparse/{cameras,images,points3D}.txt   background-only point cloud
        depth/<frame>.pfm                      relative depth in [0, 1]
        gt_depth/<frame>.pfm                   metric depth, 0 where uncovered
        masks/<frame>.pgm                      instance ids, 0 for background
        tracks.jsonl                           object point tracks
        ground_truth.json                      config, poses and analytic strength
    """
    out_dir = Path(out_dir)
    render = render_scene(config)
    strengths = analytic_strength(render, frame_gap=frame_gap)

    bundle = SceneBundle(
        root=out_dir,
        sparse_dir=out_dir / "sparse",
        depth_dir=out_dir / "depth",
        gt_depth_dir=out_dir / "gt_depth",
        mask_dir=out_dir / "masks",
        tracks_path=out_dir / "tracks.jsonl",
        ground_truth_path=out_dir / "ground_truth.json",
        analytic_strength=strengths,
    )

    serialize_colmap_text(_sfm_model(render), bundle.sparse_dir)
    for f, name in enumerate(render.frame_names):
        write_pfm(
            DepthMap(values=render.depth_rel[f], kind=DepthKind.RELATIVE, frame_id=f),
            bundle.depth_dir / f"{name}.pfm",
        )
        write_pfm(
            DepthMap(values=render.depth_gt[f], kind=DepthKind.GROUND_TRUTH, frame_id=f),
            bundle.gt_depth_dir / f"{name}.pfm",
        )
        write_pgm_mask(render.masks[f], bundle.mask_dir / f"{name}.pgm")
    write_tracks_jsonl(render.tracks, bundle.tracks_path)

    write_json(
        {
            "config": config.model_dump(mode="json"),
            "frame_gap": frame_gap,
            "frames": [
                {
                    "name": name,
                    "qvec": render.poses[f].quaternion.tolist(),
                    "tvec": render.poses[f].translation.tolist(),
                    "normalization": render.normalization[f],
                }
                for f, name in enumerate(render.frame_names)
            ],
            "analytic_strength": {str(k): v for k, v in strengths.items()},
        },
        bundle.ground_truth_path,
    )
    logger.info(
        "generated %d-frame scene with %d objects in %s",
        config.frames,
        len(config.objects),
        out_dir,
    )
    return bundle
