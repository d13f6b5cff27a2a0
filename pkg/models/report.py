from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.motion import FrameAlignment, MotionReport, ObjectMotion
from utils.config import (
    DEFAULT_FRAME_GAP,
    DEFAULT_GRID_STEP,
    DEFAULT_MIN_SAMPLES,
    DEFAULT_THRESHOLD,
    VERSION,
)
from utils.jsonio import dump_json

SCHEMA_VERSION = 1


class AnnotateParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    frame_gap: int = Field(default=DEFAULT_FRAME_GAP, ge=1)
    min_samples: int = Field(default=DEFAULT_MIN_SAMPLES, ge=1)
    threshold: float = Field(default=DEFAULT_THRESHOLD, ge=0.0)
    grid_step: int = Field(default=DEFAULT_GRID_STEP, ge=1)
    depth_kind: Literal["relative", "ground-truth"] = "relative"


class VideoJob(BaseModel):
    """One video to annotate; paths are checked when the job runs"""

    model_config = ConfigDict(frozen=True)

    video_id: str
    colmap_dir: Path
    depth_dir: Path
    mask_dir: Path
    tracks_path: Path
    params: AnnotateParams = AnnotateParams()

    @classmethod
    def from_video_dir(
        cls,
        video_dir: Path,
        params: AnnotateParams = AnnotateParams(),
        depth_subdir: Optional[str] = None,
    ) -> "VideoJob":
        video_dir = Path(video_dir)
        if depth_subdir is None:
            depth_subdir = "depth" if params.depth_kind == "relative" else "gt_depth"
        return cls(
            video_id=video_dir.name,
            colmap_dir=video_dir / "sparse",
            depth_dir=video_dir / depth_subdir,
            mask_dir=video_dir / "masks",
            tracks_path=video_dir / "tracks.jsonl",
            params=params,
        )


class FrameWarning(BaseModel):
    frame: int
    name: str
    reason: str


class VideoReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_version: Literal[1] = Field(default=SCHEMA_VERSION, alias="schema")
    video_id: str
    status: Literal["ok", "failed"] = "ok"
    n_frames: int = Field(ge=0)
    per_frame: List[FrameAlignment] = []
    objects: List[ObjectMotion] = []
    motion_strength: float = Field(default=0.0, ge=0.0)
    is_dynamic: bool = False
    threshold: float = Field(ge=0.0)
    warnings: List[FrameWarning] = []
    error: Optional[str] = None
    params: AnnotateParams
    version: str = VERSION

    @model_validator(mode="after")
    def consistent(self):
        if self.status == "failed":
            if self.error is None:
                raise ValueError("failed reports must carry an error")
            if self.objects or self.motion_strength != 0.0 or self.is_dynamic:
                raise ValueError("failed reports carry no motion results")
            return self
        expected = max((o.strength for o in self.objects), default=0.0)
        if self.motion_strength != expected:
            raise ValueError("motion_strength must be the maximum object strength")
        if self.is_dynamic != (self.motion_strength >= self.threshold):
            raise ValueError("is_dynamic disagrees with motion_strength and threshold")
        return self

    @classmethod
    def from_motion_report(
        cls,
        report: MotionReport,
        n_frames: int,
        params: AnnotateParams,
        warnings: List[FrameWarning] = (),
    ) -> "VideoReport":
        return cls(
            video_id=report.video_id,
            n_frames=n_frames,
            per_frame=report.per_frame_alignment,
            objects=report.per_object,
            motion_strength=report.motion_strength,
            is_dynamic=report.is_dynamic,
            threshold=report.threshold,
            warnings=list(warnings),
            params=params,
        )

    @classmethod
    def failed(
        cls,
        video_id: str,
        error: str,
        n_frames: int,
        params: AnnotateParams,
        per_frame: List[FrameAlignment] = (),
        warnings: List[FrameWarning] = (),
    ) -> "VideoReport":
        return cls(
            video_id=video_id,
            status="failed",
            n_frames=n_frames,
            per_frame=list(per_frame),
            threshold=params.threshold,
            warnings=list(warnings),
            error=error,
            params=params,
        )

    def to_json(self) -> bytes:
        return dump_json(self.model_dump(mode="json", by_alias=True))
