from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field

from models.camera import Intrinsics, Pose


class Trajectory(BaseModel):
    model_config = ConfigDict(frozen=True)

    poses: Tuple[Pose, ...] = Field(min_length=1)
    intr: Intrinsics

    def __len__(self) -> int:
        return len(self.poses)
