"""
Exception hierarchy for the curation pipeline.

Format errors always carry the offending file and a location so batch logs
point straight at the broken line or byte.
"""

from pathlib import Path
from typing import Optional, Union


class CuratorError(Exception):
    """Base class for every error raised by the toolkit"""


# Geometry


class GeometryError(CuratorError):
    pass


class BehindCameraError(GeometryError):
    def __init__(self, depth: float, eps: float):
        self.depth = depth
        super().__init__(f"Point is behind the camera (Z_c={depth!r} <= {eps!r})")


class InvalidDepthError(GeometryError):
    def __init__(self, depth: float):
        self.depth = depth
        super().__init__(f"Depth must be positive, got {depth!r}")


# Depth alignment


class DepthAlignmentError(CuratorError):
    pass


class EmptySamplesError(DepthAlignmentError):
    pass


class InsufficientSamplesError(DepthAlignmentError):
    def __init__(self, n_samples: int, min_samples: int):
        self.n_samples = n_samples
        self.min_samples = min_samples
        super().__init__(
            f"Only {n_samples} sparse samples, at least {min_samples} required"
        )


class DegenerateDepthError(DepthAlignmentError):
    pass


class AlignmentFailedError(DepthAlignmentError):
    pass


# File formats


class FormatError(CuratorError):
    def __init__(
        self,
        path: Union[str, Path],
        location: Optional[Union[int, str]],
        message: str,
    ):
        self.path = str(path)
        self.location = location
        self.message = message
        if location is None:
            super().__init__(f"{self.path}: {message}")
        else:
            super().__init__(f"{self.path}:{location}: {message}")

    def __reduce__(self):
        return type(self), (self.path, self.location, self.message)


class ParseError(FormatError):
    pass


class UnsupportedFormatError(FormatError):
    pass


class IntegrityError(FormatError):
    pass


class DataError(FormatError):
    pass


# Trajectories, scenes, jobs


class TrajectoryError(CuratorError):
    pass


class SceneGenerationError(CuratorError):
    pass


class JobError(CuratorError):
    def __init__(self, video_id: str, message: str):
        self.video_id = video_id
        self.message = message
        super().__init__(f"[{video_id}] {message}")

    def __reduce__(self):
        return type(self), (self.video_id, self.message)
