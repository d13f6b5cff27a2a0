from typing import List, Literal, Tuple

from pydantic import BaseModel, Field, model_validator

from models.camera import Intrinsics

Vector3 = Tuple[float, float, float]


class CameraPathConfig(BaseModel):
    """How the synthetic camera moves; every path starts at the world origin looking down +z"""

    kind: Literal["static", "linear", "zoom", "orbit"] = "static"
    velocity: Vector3 = (0.0, 0.0, 0.0)  # linear: center displacement per frame
    speed: float = 0.0  # zoom: +z displacement per frame
    target: Vector3 = (0.0, 0.0, 8.0)  # orbit look-at point
    radius: float = Field(default=8.0, gt=0)
    step: float = 0.02  # orbit: azimuth radians per frame
    translation_jitter: float = Field(default=0.0, ge=0)
    rotation_jitter: float = Field(default=0.0, ge=0)


class BoxConfig(BaseModel):
    box_min: Vector3
    box_max: Vector3

    @model_validator(mode="after")
    def ordered(self):
        if any(lo > hi for lo, hi in zip(self.box_min, self.box_max)):
            raise ValueError("box_min must not exceed box_max")
        return self

    @property
    def box_center(self) -> Vector3:
        return tuple((lo + hi) / 2 for lo, hi in zip(self.box_min, self.box_max))


class BackgroundConfig(BoxConfig):
    count: int = Field(default=2000, ge=0)
    box_min: Vector3 = (-4.0, -4.0, 9.0)
    box_max: Vector3 = (4.0, 4.0, 12.0)


class ObjectConfig(BoxConfig):
    instance_id: int = Field(ge=1, le=255)
    count: int = Field(default=400, ge=1)
    box_min: Vector3 = (-0.5, -0.5, 4.5)
    box_max: Vector3 = (0.5, 0.5, 5.5)
    velocity: Vector3 = (0.0, 0.0, 0.0)  # world units per frame
    rotation_rate: float = 0.0  # radians per frame about the vertical axis through the box center


class DepthCorruption(BaseModel):
    """d_rel = normalize((d_gt - b) / a)"""

    a: float = Field(default=1.0, gt=0)
    b: float = 0.0
    normalize: Literal["minmax", "max"] = "minmax"


class SceneConfig(BaseModel):
    seed: int = 0
    intr: Intrinsics = Intrinsics(fx=100.0, fy=100.0, cx=64.0, cy=64.0, width=128, height=128)
    camera_path: CameraPathConfig = CameraPathConfig()
    background: BackgroundConfig = BackgroundConfig()
    objects: List[ObjectConfig] = []
    frames: int = Field(default=6, ge=2)
    depth_corruption: DepthCorruption = DepthCorruption()
    depth_noise: float = Field(default=0.0, ge=0)

    @model_validator(mode="after")
    def distinct_instances(self):
        ids = [o.instance_id for o in self.objects]
        if len(ids) != len(set(ids)):
            raise ValueError("object instance ids must be distinct")
        return self
