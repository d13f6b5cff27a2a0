from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from models.depth import Alignment


class TrackPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    frame: int = Field(ge=0)
    keypoint_id: int = Field(ge=0)
    u: float
    v: float
    visible: bool = True


class InstanceTracks(BaseModel):
    """2D keypoint tracks of one object instance"""

    model_config = ConfigDict(frozen=True)

    instance_id: int = Field(ge=1)
    points: Tuple[TrackPoint, ...] = ()

    @model_validator(mode="after")
    def unique_frame_keypoint(self):
        keys = [(p.frame, p.keypoint_id) for p in self.points]
        if len(keys) != len(set(keys)):
            raise ValueError(f"duplicate (frame, keypoint) in instance {self.instance_id}")
        return self

    def at_frame(self, frame: int) -> dict:
        return {p.keypoint_id: p for p in self.points if p.frame == frame}


class SkipCounts(BaseModel):
    invisible: int = 0
    bad_depth: int = 0
    behind_camera: int = 0
    # visible but rounded off the image in either frame
    out_of_bounds: int = 0

    def __add__(self, other: "SkipCounts") -> "SkipCounts":
        return SkipCounts(
            invisible=self.invisible + other.invisible,
            bad_depth=self.bad_depth + other.bad_depth,
            behind_camera=self.behind_camera + other.behind_camera,
            out_of_bounds=self.out_of_bounds + other.out_of_bounds,
        )


class MotionField(BaseModel):
    """Normalized keypoint displacements (du, dv) between frame_i and frame_j"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    instance_id: int
    frame_i: int
    frame_j: int
    keypoint_ids: np.ndarray
    du: np.ndarray
    dv: np.ndarray
    skipped: SkipCounts = SkipCounts()

    @field_validator("keypoint_ids", mode="before")
    @classmethod
    def int_ids(cls, value):
        ids = np.array(value, dtype=np.int64).reshape(-1)
        ids.setflags(write=False)
        return ids

    @field_validator("du", "dv", mode="before")
    @classmethod
    def finite_displacements(cls, value):
        array = np.array(value, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(array)):
            raise ValueError("displacements must be finite")
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def consistent(self):
        if not (len(self.keypoint_ids) == len(self.du) == len(self.dv)):
            raise ValueError("keypoint_ids, du and dv must have the same length")
        if self.frame_i == self.frame_j:
            raise ValueError("motion field needs two distinct frames")
        return self

    @property
    def frame_gap(self) -> int:
        return self.frame_j - self.frame_i

    @property
    def magnitudes(self) -> np.ndarray:
        return np.sqrt(self.du * self.du + self.dv * self.dv)

    @property
    def pairs(self) -> List[tuple]:
        return [
            (k, self.frame_i, self.frame_j, du, dv)
            for k, du, dv in zip(self.keypoint_ids.tolist(), self.du.tolist(), self.dv.tolist())
        ]

    def __len__(self) -> int:
        return len(self.du)


class ObjectMotion(BaseModel):
    instance: int = Field(ge=1)
    strength: float = Field(ge=0)
    n_pairs: int = Field(ge=0)
    skipped: SkipCounts = SkipCounts()


class FrameAlignment(BaseModel):
    frame: int
    name: str = ""
    alpha: float
    beta: float
    n_sparse: int

    @classmethod
    def from_alignment(cls, frame: int, name: str, alignment: Alignment) -> "FrameAlignment":
        return cls(
            frame=frame,
            name=name,
            alpha=alignment.alpha,
            beta=alignment.beta,
            n_sparse=alignment.n_samples,
        )


class MotionReport(BaseModel):
    video_id: str
    per_object: List[ObjectMotion] = []
    motion_strength: float = Field(ge=0)
    threshold: float = Field(ge=0)
    is_dynamic: bool
    per_frame_alignment: List[FrameAlignment] = []

    @model_validator(mode="after")
    def strength_consistent(self):
        expected = max((o.strength for o in self.per_object), default=0.0)
        if self.motion_strength != expected:
            raise ValueError("motion_strength must be the maximum object strength")
        if self.is_dynamic != (self.motion_strength >= self.threshold):
            raise ValueError("is_dynamic disagrees with motion_strength and threshold")
        return self
