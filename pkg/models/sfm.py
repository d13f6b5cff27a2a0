from typing import Dict, List, Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from models.camera import Intrinsics, Pose

CameraModelName = Literal["SIMPLE_PINHOLE", "PINHOLE"]


class SfmCamera(BaseModel):
    model_config = ConfigDict(frozen=True)

    camera_id: int
    model: CameraModelName
    width: int = Field(ge=1)
    height: int = Field(ge=1)
    params: Tuple[float, ...]

    @model_validator(mode="after")
    def param_count(self):
        expected = 3 if self.model == "SIMPLE_PINHOLE" else 4
        if len(self.params) != expected:
            raise ValueError(f"{self.model} takes {expected} params, got {len(self.params)}")
        return self

    @property
    def intrinsics(self) -> Intrinsics:
        if self.model == "SIMPLE_PINHOLE":
            f, cx, cy = self.params
            fx = fy = f
        else:
            fx, fy, cx, cy = self.params
        return Intrinsics(fx=fx, fy=fy, cx=cx, cy=cy, width=self.width, height=self.height)

    @classmethod
    def from_intrinsics(cls, camera_id: int, intr: Intrinsics) -> "SfmCamera":
        return cls(
            camera_id=camera_id,
            model="PINHOLE",
            width=intr.width,
            height=intr.height,
            params=(intr.fx, intr.fy, intr.cx, intr.cy),
        )


class SfmFrame(BaseModel):
    """One images.txt record; the quaternion is kept as read so text round trips are exact"""

    model_config = ConfigDict(frozen=True)

    image_id: int
    name: str
    camera_id: int
    qvec: Tuple[float, float, float, float]
    tvec: Tuple[float, float, float]
    points2d: Tuple[Tuple[float, float, int], ...] = ()

    @field_validator("qvec")
    @classmethod
    def nonzero_quaternion(cls, value):
        if not np.isfinite(value).all() or np.linalg.norm(value) == 0:
            raise ValueError("quaternion must be finite and non-zero")
        return value

    @property
    def pose(self) -> Pose:
        return Pose.from_quaternion(self.qvec, self.tvec)

    @property
    def stem(self) -> str:
        return self.name.rsplit(".", 1)[0] if "." in self.name else self.name


class SparsePoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    point_id: int
    xyz: Tuple[float, float, float]
    rgb: Tuple[int, int, int] = (0, 0, 0)
    error: float = 0.0
    track: Tuple[Tuple[int, int], ...] = ()

    @field_validator("xyz")
    @classmethod
    def finite_xyz(cls, value):
        if not np.isfinite(value).all():
            raise ValueError("point coordinates must be finite")
        return value

    @field_validator("rgb")
    @classmethod
    def byte_colors(cls, value):
        if any(not 0 <= c <= 255 for c in value):
            raise ValueError("rgb components must be bytes")
        return value


class SparseCloud(BaseModel):
    model_config = ConfigDict(frozen=True)

    points: Tuple[SparsePoint, ...] = ()

    @model_validator(mode="after")
    def unique_ids(self):
        ids = [p.point_id for p in self.points]
        if len(ids) != len(set(ids)):
            raise ValueError("point ids must be unique")
        return self

    @property
    def positions(self) -> np.ndarray:
        if not self.points:
            return np.zeros((0, 3))
        return np.array([p.xyz for p in self.points], dtype=np.float64)

    @classmethod
    def from_positions(cls, positions: np.ndarray) -> "SparseCloud":
        return cls(
            points=tuple(
                SparsePoint(point_id=i + 1, xyz=tuple(float(c) for c in xyz))
                for i, xyz in enumerate(np.asarray(positions, dtype=np.float64))
            )
        )

    def __len__(self) -> int:
        return len(self.points)


class SfmModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    cameras: Dict[int, SfmCamera]
    frames: List[SfmFrame]
    cloud: SparseCloud = SparseCloud()

    @model_validator(mode="after")
    def frames_reference_cameras(self):
        for frame in self.frames:
            if frame.camera_id not in self.cameras:
                raise ValueError(
                    f"image {frame.image_id} references missing camera {frame.camera_id}"
                )
        names = [f.name for f in self.frames]
        if names != sorted(names):
            raise ValueError("frames must be ordered by name")
        return self

    def intrinsics_for(self, frame: SfmFrame) -> Intrinsics:
        return self.cameras[frame.camera_id].intrinsics
