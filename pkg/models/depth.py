from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class DepthKind(str, Enum):
    RELATIVE = "relative"
    ALIGNED = "aligned"
    GROUND_TRUTH = "ground-truth"


class DepthMap(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray
    kind: DepthKind = DepthKind.RELATIVE
    frame_id: int = 0

    @field_validator("values", mode="before")
    @classmethod
    def check_values(cls, value):
        values = np.array(value)
        if values.ndim != 2 or values.size == 0:
            raise ValueError(f"depth raster must be a non-empty 2D array, got {values.shape}")
        if not np.issubdtype(values.dtype, np.floating):
            values = values.astype(np.float64)
        if not np.all(np.isfinite(values)):
            raise ValueError("depth raster contains non-finite values")
        values.setflags(write=False)
        return values

    @model_validator(mode="after")
    def relative_range(self):
        # aligned values may be non-positive where the affine fit extrapolates
        if self.kind == DepthKind.RELATIVE:
            if self.values.min() < 0 or self.values.max() > 1:
                raise ValueError("relative depth must lie in [0, 1]")
        return self

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


class SparseDepthSamples(BaseModel):
    """d_SfM at integer pixels, at most one entry per pixel"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    u: np.ndarray
    v: np.ndarray
    depth: np.ndarray
    frame_id: int = 0

    @field_validator("u", "v", mode="before")
    @classmethod
    def check_pixels(cls, value):
        pixels = np.array(value, dtype=np.int64).reshape(-1)
        pixels.setflags(write=False)
        return pixels

    @field_validator("depth", mode="before")
    @classmethod
    def check_depth(cls, value):
        depth = np.array(value, dtype=np.float64).reshape(-1)
        if np.any(~np.isfinite(depth)) or np.any(depth <= 0):
            raise ValueError("sparse depths must be finite and positive")
        depth.setflags(write=False)
        return depth

    @model_validator(mode="after")
    def one_entry_per_pixel(self):
        if not (len(self.u) == len(self.v) == len(self.depth)):
            raise ValueError("u, v and depth must have the same length")
        if len(set(zip(self.u.tolist(), self.v.tolist()))) != len(self.u):
            raise ValueError("duplicate pixel in sparse samples")
        return self

    def __len__(self) -> int:
        return len(self.depth)

    @property
    def entries(self):
        return list(zip(self.u.tolist(), self.v.tolist(), self.depth.tolist()))


class Alignment(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(gt=0)
    beta: float
    n_samples: int = Field(ge=0)

    @field_validator("alpha", "beta")
    @classmethod
    def finite(cls, value: float) -> float:
        if not np.isfinite(value):
            raise ValueError("alignment parameters must be finite")
        return value
