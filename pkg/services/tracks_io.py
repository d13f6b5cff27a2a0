"""
Keypoint tracks as JSONL, one record per (instance, keypoint, frame):

    {"instance": 1, "keypoint": 0, "frame": 3, "u": 61.2, "v": 40.0, "visible": true}
"""

from collections import defaultdict
from pathlib import Path
from typing import Dict, Iterable, List, Union

import numpy as np
import orjson
from pydantic import BaseModel, Field, StrictBool, StrictInt, ValidationError

from models.motion import InstanceTracks, TrackPoint
from services.motion_estimator import sample_keypoints
from utils.errors import IntegrityError, ParseError
from utils.jsonio import dump_jsonl_line

PathLike = Union[str, Path]


class TrackRecord(BaseModel):
    instance: StrictInt = Field(ge=1)
    keypoint: StrictInt
    frame: StrictInt
    u: float
    v: float
    visible: StrictBool


def read_tracks_jsonl(path: PathLike) -> List[InstanceTracks]:
    path = Path(path)
    if not path.exists():
        raise ParseError(path, None, "file not found")

    grouped: Dict[int, Dict[tuple, TrackPoint]] = defaultdict(dict)
    with open(path, "rb") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = TrackRecord.model_validate(orjson.loads(line))
            except orjson.JSONDecodeError as e:
                raise ParseError(path, lineno, f"malformed JSON: {e}") from e
            except ValidationError as e:
                raise ParseError(path, lineno, f"malformed track record: {e}") from e

            key = (record.frame, record.keypoint)
            if key in grouped[record.instance]:
                raise IntegrityError(
                    path,
                    lineno,
                    f"duplicate (instance, frame, keypoint) = "
                    f"({record.instance}, {record.frame}, {record.keypoint})",
                )
            try:
                grouped[record.instance][key] = TrackPoint(
                    frame=record.frame,
                    keypoint_id=record.keypoint,
                    u=record.u,
                    v=record.v,
                    visible=record.visible,
                )
            except ValidationError as e:
                raise ParseError(path, lineno, f"malformed track record: {e}") from e

    tracks = []
    for instance_id in sorted(grouped):
        points = grouped[instance_id]
        try:
            tracks.append(
                InstanceTracks(
                    instance_id=instance_id,
                    points=tuple(points[k] for k in sorted(points)),
                )
            )
        except ValidationError as e:
            raise ParseError(path, None, f"invalid instance {instance_id}: {e}") from e
    return tracks


def write_tracks_jsonl(tracks: Iterable[InstanceTracks], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        for instance in sorted(tracks, key=lambda t: t.instance_id):
            for p in sorted(instance.points, key=lambda p: (p.frame, p.keypoint_id)):
                f.write(
                    dump_jsonl_line(
                        {
                            "instance": instance.instance_id,
                            "keypoint": p.keypoint_id,
                            "frame": p.frame,
                            "u": p.u,
                            "v": p.v,
                            "visible": p.visible,
                        }
                    )
                )
    return path


def keypoint_queries(mask: np.ndarray, grid_step: int, frame: int = 0) -> List[InstanceTracks]:
    """Grid-sampled query keypoints for every instance present in the mask"""
    queries = []
    for instance_id in np.unique(mask):
        if instance_id == 0:
            continue
        points = sample_keypoints(mask, int(instance_id), grid_step)
        queries.append(
            InstanceTracks(
                instance_id=int(instance_id),
                points=tuple(
                    TrackPoint(frame=frame, keypoint_id=k, u=u, v=v, visible=True)
                    for k, (u, v) in enumerate(points)
                ),
            )
        )
    return queries


def write_keypoint_queries(
    mask: np.ndarray, grid_step: int, path: PathLike, frame: int = 0
) -> Path:
    return write_tracks_jsonl(keypoint_queries(mask, grid_step, frame), path)
