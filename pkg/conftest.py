"""
Shared fixtures and helpers for the test suites.
"""

from pathlib import Path

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from models.camera import Intrinsics, Pose
from models.scene import SceneConfig
from services.scene_synthesizer import SceneBundle, generate_scene

INTR_128 = Intrinsics(fx=100.0, fy=100.0, cx=64.0, cy=64.0, width=128, height=128)


def random_pose(rng: np.random.Generator, spread: float = 2.0) -> Pose:
    rotation = Rotation.random(random_state=rng).as_matrix()
    return Pose(rotation=rotation, translation=rng.uniform(-spread, spread, 3))


def random_intrinsics(rng: np.random.Generator) -> Intrinsics:
    width = int(rng.integers(32, 512))
    height = int(rng.integers(32, 512))
    return Intrinsics(
        fx=float(rng.uniform(50.0, 500.0)),
        fy=float(rng.uniform(50.0, 500.0)),
        cx=float(rng.uniform(0.2, 0.8) * width),
        cy=float(rng.uniform(0.2, 0.8) * height),
        width=width,
        height=height,
    )


def points_in_front(rng: np.random.Generator, pose: Pose, n: int) -> np.ndarray:
    """World points whose camera-space depth lies in [0.5, 10]"""
    camera = np.stack(
        [rng.uniform(-2.0, 2.0, n), rng.uniform(-2.0, 2.0, n), rng.uniform(0.5, 10.0, n)],
        axis=1,
    )
    return (camera - pose.translation) @ pose.rotation


def make_video(root: Path, name: str, config: SceneConfig, frame_gap: int = 1) -> SceneBundle:
    return generate_scene(config, Path(root) / name, frame_gap=frame_gap)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def intr():
    return INTR_128


@pytest.fixture
def identity_pose():
    return Pose.identity()
