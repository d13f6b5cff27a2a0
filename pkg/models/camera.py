from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.spatial.transform import Rotation

ORTHONORMAL_TOL = 1e-9
PLUCKER_TOL = 1e-9


def _frozen_array(value, shape) -> np.ndarray:
    array = np.array(value, dtype=np.float64)
    if array.shape != shape:
        raise ValueError(f"expected shape {shape}, got {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ValueError("values must be finite")
    array.setflags(write=False)
    return array


class Intrinsics(BaseModel):
    """Pinhole intrinsics; pixel (i, j) is sampled at (i, j) exactly"""

    model_config = ConfigDict(frozen=True)

    fx: float = Field(gt=0)
    fy: float = Field(gt=0)
    cx: float
    cy: float
    width: int = Field(ge=1)
    height: int = Field(ge=1)

    @model_validator(mode="after")
    def principal_point_inside(self):
        if not 0 <= self.cx < self.width:
            raise ValueError(f"cx={self.cx} outside [0, {self.width})")
        if not 0 <= self.cy < self.height:
            raise ValueError(f"cy={self.cy} outside [0, {self.height})")
        return self

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )


class Pose(BaseModel):
    """World-to-camera rigid transform: P_camera = rotation @ P_world + translation"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    rotation: np.ndarray
    translation: np.ndarray

    @field_validator("rotation", mode="before")
    @classmethod
    def check_rotation(cls, value):
        rotation = _frozen_array(value, (3, 3))
        if not np.allclose(rotation.T @ rotation, np.eye(3), rtol=0, atol=ORTHONORMAL_TOL):
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(rotation) - 1.0) > ORTHONORMAL_TOL:
            raise ValueError("rotation determinant is not +1")
        return rotation

    @field_validator("translation", mode="before")
    @classmethod
    def check_translation(cls, value):
        return _frozen_array(value, (3,))

    @classmethod
    def identity(cls) -> "Pose":
        return cls(rotation=np.eye(3), translation=np.zeros(3))

    @classmethod
    def from_quaternion(cls, qvec: Sequence[float], tvec: Sequence[float]) -> "Pose":
        """Build from a (qw, qx, qy, qz) quaternion; the quaternion is renormalized"""
        qw, qx, qy, qz = qvec
        rotation = Rotation.from_quat([qx, qy, qz, qw]).as_matrix()
        return cls(rotation=rotation, translation=tvec)

    @property
    def quaternion(self) -> np.ndarray:
        """(qw, qx, qy, qz) with qw >= 0"""
        qx, qy, qz, qw = Rotation.from_matrix(self.rotation).as_quat()
        qvec = np.array([qw, qx, qy, qz])
        return -qvec if qw < 0 else qvec

    @property
    def matrix(self) -> np.ndarray:
        transform = np.eye(4)
        transform[:3, :3] = self.rotation
        transform[:3, 3] = self.translation
        return transform


class PluckerRay(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    direction: np.ndarray
    moment: np.ndarray

    @field_validator("direction", "moment", mode="before")
    @classmethod
    def check_vector(cls, value):
        return _frozen_array(value, (3,))

    @model_validator(mode="after")
    def plucker_constraint(self):
        if abs(np.linalg.norm(self.direction) - 1.0) > PLUCKER_TOL:
            raise ValueError("direction must be unit length")
        if abs(float(self.direction @ self.moment)) > PLUCKER_TOL:
            raise ValueError("direction and moment must be orthogonal")
        return self

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.direction, self.moment])
