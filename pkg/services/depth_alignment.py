"""
Sparse SfM depth and median-based scale/shift alignment of relative depth.

    alpha = median(d_sfm) / median(d_rel)
    beta = median(d_sfm - alpha * d_rel)
    d_aligned = alpha * d_rel + beta

All medians run over the sparse sample pixels only; every frame gets its own
(alpha, beta).
"""

import logging
from typing import Iterable, Optional, Tuple

import numpy as np

from models.camera import Intrinsics, Pose
from models.depth import Alignment, DepthKind, DepthMap, SparseDepthSamples
from models.sfm import SparseCloud
from services.geometry import EPS_Z, project_points, round_pixel
from utils.config import DEFAULT_MIN_SAMPLES
from utils.errors import (
    AlignmentFailedError,
    DegenerateDepthError,
    EmptySamplesError,
    InsufficientSamplesError,
)

logger = logging.getLogger(__name__)
DEGENERATE_EPS = 1e-8


def rasterize_sparse_depth(
    cloud: SparseCloud,
    pose: Pose,
    intr: Intrinsics,
    frame_id: int = 0,
    eps_z: float = EPS_Z,
) -> SparseDepthSamples:
    """Project the cloud and keep the nearest depth per rounded pixel"""
    positions = cloud.positions
    if len(positions) == 0:
        raise EmptySamplesError("sparse cloud is empty")

    uv, depth = project_points(pose, intr, positions)
    valid = (depth > eps_z) & np.isfinite(uv).all(axis=1)
    uv, depth = uv[valid], depth[valid]

    u = round_pixel(uv[:, 0]).reshape(-1)
    v = round_pixel(uv[:, 1]).reshape(-1)
    inside = (u >= 0) & (u < intr.width) & (v >= 0) & (v < intr.height)
    u, v, depth = u[inside], v[inside], depth[inside]
    if len(depth) == 0:
        raise EmptySamplesError(f"no cloud point projects into frame {frame_id}")

    # nearest surface wins: sort by pixel, then depth, keep the first of each pixel
    flat = v * intr.width + u
    order = np.lexsort((depth, flat))
    first = np.ones(len(order), dtype=bool)
    first[1:] = flat[order][1:] != flat[order][:-1]
    keep = order[first]

    return SparseDepthSamples(u=u[keep], v=v[keep], depth=depth[keep], frame_id=frame_id)


def drop_masked_samples(samples: SparseDepthSamples, mask: np.ndarray) -> SparseDepthSamples:
    """Remove samples that fall on potentially-moving (non-zero mask) pixels"""
    static = np.asarray(mask)[samples.v, samples.u] == 0
    return SparseDepthSamples(
        u=samples.u[static],
        v=samples.v[static],
        depth=samples.depth[static],
        frame_id=samples.frame_id,
    )


def median(values: Iterable[float]) -> float:
    array = np.fromiter(values, dtype=np.float64) if not isinstance(values, np.ndarray) else values
    array = np.asarray(array, dtype=np.float64).reshape(-1)
    if array.size == 0:
        raise ValueError("median of an empty list")
    if not np.all(np.isfinite(array)):
        raise ValueError("median input contains non-finite values")
    return float(np.median(array))


def align_depth(
    d_rel: DepthMap,
    sparse: SparseDepthSamples,
    min_samples: int = DEFAULT_MIN_SAMPLES,
    eps: float = DEGENERATE_EPS,
) -> Tuple[Alignment, DepthMap]:
    if len(sparse) < min_samples:
        raise InsufficientSamplesError(len(sparse), min_samples)

    inside = (
        (sparse.u >= 0) & (sparse.u < d_rel.width) & (sparse.v >= 0) & (sparse.v < d_rel.height)
    )
    if not inside.all():
        raise ValueError("sparse sample outside the relative depth raster")

    rel = d_rel.values[sparse.v, sparse.u].astype(np.float64)
    sfm = sparse.depth

    rel_median = median(rel)
    if rel_median <= eps:
        raise DegenerateDepthError(
            f"median relative depth {rel_median!r} at sample pixels is degenerate"
        )

    alpha = median(sfm) / rel_median
    if not (np.isfinite(alpha) and alpha > 0):
        raise AlignmentFailedError(f"alignment produced non-positive scale {alpha!r}")
    beta = median(sfm - alpha * rel)

    aligned = alpha * d_rel.values.astype(np.float64) + beta
    logger.debug(
        "frame %d aligned: alpha=%.6g beta=%.6g samples=%d",
        d_rel.frame_id,
        alpha,
        beta,
        len(sparse),
    )
    return (
        Alignment(alpha=alpha, beta=beta, n_samples=len(sparse)),
        DepthMap(values=aligned, kind=DepthKind.ALIGNED, frame_id=d_rel.frame_id),
    )


def ground_truth_alignment(
    depth: DepthMap, sparse: Optional[SparseDepthSamples] = None
) -> Tuple[Alignment, DepthMap]:
    """Metric depth needs no alignment; diagnostics record the identity fit"""
    n_samples = len(sparse) if sparse is not None else 0
    return Alignment(alpha=1.0, beta=0.0, n_samples=n_samples), depth
