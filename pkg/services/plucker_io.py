"""
PLK1 binary layout for per-frame Plucker maps:

    b"PLK1" | u32 frames | u32 height | u32 width      (little-endian)
    float32 payload, frame-major, row-major, channel-last (6 channels)

A JSON sidecar with the same stem lists the frame names.
"""

import struct
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from utils.errors import DataError, ParseError
from utils.jsonio import read_json, write_json

MAGIC = b"PLK1"
HEADER = struct.Struct("<III")
HEADER_SIZE = len(MAGIC) + HEADER.size
CHANNELS = ("d_x", "d_y", "d_z", "m_x", "m_y", "m_z")

PathLike = Union[str, Path]


def sidecar_path(path: PathLike) -> Path:
    return Path(path).with_suffix(".json")


def write_plucker(
    rasters: Sequence[np.ndarray],
    path: PathLike,
    frame_names: Optional[Sequence[str]] = None,
) -> Path:
    path = Path(path)
    if sidecar_path(path) == path:
        raise DataError(path, None, "PLK1 output must not use the .json sidecar suffix")
    if len(rasters) == 0:
        raise DataError(path, None, "no frames to write")
    shape = np.shape(rasters[0])
    if len(shape) != 3 or shape[2] != len(CHANNELS):
        raise DataError(path, 0, f"frame 0 has shape {shape}, expected H x W x 6")
    for index, raster in enumerate(rasters):
        if np.shape(raster) != shape:
            raise DataError(
                path, index, f"frame {index} has shape {np.shape(raster)}, expected {shape}"
            )
    if frame_names is None:
        frame_names = [f"{i:06d}" for i in range(len(rasters))]
    if len(frame_names) != len(rasters):
        raise DataError(path, None, "frame name count does not match frame count")

    height, width, _ = shape
    payload = np.ascontiguousarray(np.stack(rasters), dtype="<f4").tobytes()
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(MAGIC + HEADER.pack(len(rasters), height, width) + payload)
    write_json(
        {
            "format": "PLK1",
            "frames": list(frame_names),
            "height": height,
            "width": width,
            "channels": list(CHANNELS),
        },
        sidecar_path(path),
    )
    return path


def read_plucker(path: PathLike) -> Tuple[np.ndarray, List[str]]:
    path = Path(path)
    if not path.exists():
        raise ParseError(path, None, "file not found")
    data = path.read_bytes()
    if len(data) < HEADER_SIZE:
        raise ParseError(path, len(data), "truncated PLK1 header")
    if data[:4] != MAGIC:
        raise ParseError(path, 0, f"bad magic {data[:4]!r}")
    n_frames, height, width = HEADER.unpack_from(data, len(MAGIC))

    expected = n_frames * height * width * len(CHANNELS) * 4
    payload = data[HEADER_SIZE:]
    if len(payload) != expected:
        raise ParseError(
            path, HEADER_SIZE, f"payload is {len(payload)} bytes, header implies {expected}"
        )
    rasters = (
        np.frombuffer(payload, dtype="<f4")
        .reshape(n_frames, height, width, len(CHANNELS))
        .astype(np.float32)
    )

    sidecar = sidecar_path(path)
    names = read_json(sidecar)["frames"] if sidecar.exists() else [
        f"{i:06d}" for i in range(n_frames)
    ]
    return rasters, names
