"""
Per-video annotation: align every frame's depth to the SfM cloud, estimate
object motion fields between frame pairs and reduce them to a report.

Frames correspond across inputs by name: COLMAP image `frame_0003.png` reads
`depth/frame_0003.pfm` and `masks/frame_0003.pgm`, and tracks refer to frames
by their 0-based index in COLMAP name order.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from models.depth import DepthKind, DepthMap
from models.motion import FrameAlignment
from models.report import AnnotateParams, FrameWarning, VideoJob, VideoReport
from models.sfm import SfmModel
from services.colmap_io import parse_colmap_text
from services.depth_alignment import (
    align_depth,
    drop_masked_samples,
    ground_truth_alignment,
    rasterize_sparse_depth,
)
from services.motion_estimator import build_motion_report, motion_field, object_motion
from services.raster_io import read_pfm, read_pgm_mask
from services.tracks_io import read_tracks_jsonl
from utils.errors import DepthAlignmentError, EmptySamplesError, FormatError, JobError

logger = logging.getLogger(__name__)

MAX_UNALIGNABLE_FRACTION = 0.5

PathLike = Union[str, Path]


def discover_jobs(
    dataset_root: PathLike,
    params: AnnotateParams = AnnotateParams(),
    depth_subdir: Optional[str] = None,
) -> List[VideoJob]:
    """One job per sub-directory of the dataset root, sorted by video id"""
    dataset_root = Path(dataset_root)
    if not dataset_root.is_dir():
        raise JobError(dataset_root.name, f"dataset root {dataset_root} is not a directory")
    return [
        VideoJob.from_video_dir(d, params, depth_subdir)
        for d in sorted(dataset_root.iterdir())
        if d.is_dir()
    ]


def _require(job: VideoJob, path: Path) -> Path:
    if not path.exists():
        raise JobError(job.video_id, f"missing input {path}")
    return path


def _load_frame(job: VideoJob, model: SfmModel, index: int) -> Tuple[DepthMap, np.ndarray]:
    frame = model.frames[index]
    intr = model.intrinsics_for(frame)
    kind = DepthKind.RELATIVE if job.params.depth_kind == "relative" else DepthKind.GROUND_TRUTH

    depth_path = _require(job, job.depth_dir / f"{frame.stem}.pfm")
    depth = read_pfm(depth_path, kind=kind, frame_id=index)
    mask = read_pgm_mask(_require(job, job.mask_dir / f"{frame.stem}.pgm"))
    expected = (intr.height, intr.width)
    if depth.values.shape != expected or mask.shape != expected:
        raise JobError(
            job.video_id,
            f"frame {frame.name}: depth {depth.values.shape} and mask {mask.shape} "
            f"must match the camera resolution {expected}",
        )
    return depth, mask


def _align_frame(
    job: VideoJob, model: SfmModel, index: int, depth: DepthMap, mask: np.ndarray
) -> Tuple[FrameAlignment, DepthMap]:
    frame = model.frames[index]
    intr = model.intrinsics_for(frame)

    if job.params.depth_kind == "ground-truth":
        try:
            samples = rasterize_sparse_depth(model.cloud, frame.pose, intr, frame_id=index)
        except EmptySamplesError:
            samples = None
        alignment, aligned = ground_truth_alignment(depth, samples)
    else:
        samples = rasterize_sparse_depth(model.cloud, frame.pose, intr, frame_id=index)
        samples = drop_masked_samples(samples, mask)
        alignment, aligned = align_depth(depth, samples, min_samples=job.params.min_samples)
    return FrameAlignment.from_alignment(index, frame.name, alignment), aligned


def annotate(job: VideoJob) -> VideoReport:
    """Run the full pipeline for one video; input problems raise JobError"""
    params = job.params
    for path in (job.colmap_dir, job.depth_dir, job.mask_dir, job.tracks_path):
        _require(job, path)

    try:
        model = parse_colmap_text(job.colmap_dir)
        tracks = read_tracks_jsonl(job.tracks_path)
    except FormatError as e:
        raise JobError(job.video_id, str(e)) from e

    n_frames = len(model.frames)
    if len({model.intrinsics_for(f) for f in model.frames}) > 1:
        raise JobError(job.video_id, "frames use cameras with different intrinsics")

    alignments: Dict[int, FrameAlignment] = {}
    aligned: Dict[int, DepthMap] = {}
    warnings: List[FrameWarning] = []
    for index, frame in enumerate(model.frames):
        try:
            depth, mask = _load_frame(job, model, index)
        except FormatError as e:
            raise JobError(job.video_id, str(e)) from e
        try:
            alignments[index], aligned[index] = _align_frame(job, model, index, depth, mask)
        except DepthAlignmentError as e:
            logger.warning("[%s] skipping frame %s: %s", job.video_id, frame.name, e)
            warnings.append(FrameWarning(frame=index, name=frame.name, reason=str(e)))

    unalignable = n_frames - len(aligned)
    if n_frames == 0 or unalignable > MAX_UNALIGNABLE_FRACTION * n_frames:
        error = f"{unalignable} of {n_frames} frames could not be aligned"
        logger.error("[%s] %s", job.video_id, error)
        return VideoReport.failed(
            video_id=job.video_id,
            error=error,
            n_frames=n_frames,
            params=params,
            per_frame=[alignments[i] for i in sorted(alignments)],
            warnings=warnings,
        )

    objects = []
    for instance in tracks:
        fields = []
        for i in range(n_frames - params.frame_gap):
            j = i + params.frame_gap
            if i not in aligned:
                continue
            fields.append(
                motion_field(
                    instance,
                    aligned[i],
                    model.frames[i].pose,
                    model.frames[j].pose,
                    model.intrinsics_for(model.frames[i]),
                    i,
                    j,
                )
            )
        motion = object_motion(instance.instance_id, fields)
        if motion.skipped.out_of_bounds:
            logger.warning(
                "[%s] instance %d: %d visible track points fall outside the image",
                job.video_id,
                instance.instance_id,
                motion.skipped.out_of_bounds,
            )
        objects.append(motion)

    report = build_motion_report(
        job.video_id, objects, params.threshold, [alignments[i] for i in sorted(alignments)]
    )
    logger.info(
        "[%s] motion_strength=%.6g dynamic=%s (%d objects, %d frames skipped)",
        job.video_id,
        report.motion_strength,
        report.is_dynamic,
        len(objects),
        unalignable,
    )
    return VideoReport.from_motion_report(report, n_frames, params, warnings)


def _run_job(job: VideoJob) -> Tuple[str, Optional[VideoReport], Optional[str]]:
    try:
        return job.video_id, annotate(job), None
    except Exception as e:
        logger.error("[%s] annotation failed: %s", job.video_id, e)
        return job.video_id, None, str(e)


def annotate_batch(
    jobs: Sequence[VideoJob],
    out_dir: PathLike,
    workers: int = 1,
    progress: bool = True,
) -> Dict:
    """
    Annotate every job and write `<out_dir>/<video_id>.json` per produced
    report. One failing video never aborts the batch.
    """
    video_ids = [job.video_id for job in jobs]
    if len(video_ids) != len(set(video_ids)):
        raise ValueError("video ids must be unique within a batch")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = {"success": [], "failed": [], "total": len(jobs)}

    if workers <= 1 or len(jobs) <= 1:
        outcomes = map(_run_job, jobs)
        outcomes = list(tqdm(outcomes, total=len(jobs), desc="Annotating", disable=not progress))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(
                tqdm(
                    pool.map(_run_job, jobs),
                    total=len(jobs),
                    desc="Annotating",
                    disable=not progress,
                )
            )

    for video_id, report, error in sorted(outcomes, key=lambda o: o[0]):
        if report is None:
            results["failed"].append({"video_id": video_id, "error": error})
            continue

        path = out_dir / f"{video_id}.json"
        path.write_bytes(report.to_json())
        if report.status == "failed":
            results["failed"].append(
                {"video_id": video_id, "error": report.error, "report": str(path)}
            )
        else:
            results["success"].append(
                {
                    "video_id": video_id,
                    "motion_strength": report.motion_strength,
                    "is_dynamic": report.is_dynamic,
                    "report": str(path),
                }
            )
    return results
