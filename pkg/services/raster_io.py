"""
PFM depth rasters and PGM instance masks.

PFM stores rows bottom-to-top; in memory rasters are top-to-bottom. Writers
emit the canonical headers `Pf\\n{W} {H}\\n-1.0\\n` and `P5\\n{W} {H}\\n255\\n`.
"""

from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
from pydantic import ValidationError

from models.depth import DepthKind, DepthMap
from utils.errors import DataError, ParseError, UnsupportedFormatError

PathLike = Union[str, Path]
_WHITESPACE = b" \t\r\n"


def _read_bytes(path: Path) -> bytes:
    if not path.exists():
        raise ParseError(path, None, "file not found")
    return path.read_bytes()


def _pfm_line(data: bytes, offset: int, path: Path) -> Tuple[str, int]:
    end = data.find(b"\n", offset)
    if end < 0:
        raise ParseError(path, offset, "truncated PFM header")
    try:
        return data[offset:end].decode("ascii").strip(), end + 1
    except UnicodeDecodeError as e:
        raise ParseError(path, offset, "PFM header is not ASCII") from e


def read_pfm(path: PathLike, kind: DepthKind = DepthKind.RELATIVE, frame_id: int = 0) -> DepthMap:
    path = Path(path)
    data = _read_bytes(path)

    magic, offset = _pfm_line(data, 0, path)
    if magic == "PF":
        raise UnsupportedFormatError(path, 0, "color PFM (PF) is not supported")
    if magic != "Pf":
        raise ParseError(path, 0, f"bad PFM magic {magic!r}")

    dims_offset = offset
    dims, offset = _pfm_line(data, offset, path)
    try:
        width, height = (int(x) for x in dims.split())
    except ValueError as e:
        raise ParseError(path, dims_offset, f"bad PFM dimensions {dims!r}") from e
    if width < 1 or height < 1:
        raise ParseError(path, dims_offset, f"bad PFM dimensions {dims!r}")

    scale_offset = offset
    scale_text, offset = _pfm_line(data, offset, path)
    try:
        scale = float(scale_text)
    except ValueError as e:
        raise ParseError(path, scale_offset, f"bad PFM scale {scale_text!r}") from e
    if scale == 0 or not np.isfinite(scale):
        raise ParseError(path, scale_offset, f"bad PFM scale {scale_text!r}")

    expected = width * height * 4
    payload = data[offset:]
    if len(payload) < expected:
        raise ParseError(
            path, offset, f"truncated payload: expected {expected} bytes, got {len(payload)}"
        )
    if len(payload) > expected:
        raise ParseError(path, offset + expected, "trailing bytes after PFM payload")

    dtype = "<f4" if scale < 0 else ">f4"
    values = np.frombuffer(payload, dtype=dtype).reshape(height, width)[::-1].astype(np.float32)
    if not np.all(np.isfinite(values)):
        raise DataError(path, offset, "PFM payload contains non-finite values")
    try:
        return DepthMap(values=values, kind=kind, frame_id=frame_id)
    except ValidationError as e:
        raise DataError(path, offset, f"invalid {kind.value} depth: {e}") from e


def write_pfm(depth: DepthMap, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = f"Pf\n{depth.width} {depth.height}\n-1.0\n".encode("ascii")
    payload = np.ascontiguousarray(depth.values[::-1], dtype="<f4").tobytes()
    path.write_bytes(header + payload)
    return path


def _pgm_header(data: bytes, path: Path) -> Tuple[List[str], int]:
    tokens: List[str] = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos] in _WHITESPACE:
            pos += 1
        if pos >= len(data):
            raise ParseError(path, pos, "truncated PGM header")
        if data[pos] == ord("#"):
            end = data.find(b"\n", pos)
            if end < 0:
                raise ParseError(path, pos, "truncated PGM header")
            pos = end + 1
            continue
        start = pos
        while pos < len(data) and data[pos] not in _WHITESPACE:
            pos += 1
        tokens.append(data[start:pos].decode("ascii", errors="replace"))
    if pos >= len(data):
        raise ParseError(path, pos, "PGM header not terminated")
    # exactly one whitespace byte separates maxval from the raster
    return tokens, pos + 1


def read_pgm_mask(path: PathLike) -> np.ndarray:
    """H x W uint8 raster; 0 is background, 1..255 are instance ids"""
    path = Path(path)
    data = _read_bytes(path)
    tokens, offset = _pgm_header(data, path)

    magic = tokens[0]
    if magic in ("P2", "P1", "P3", "P4", "P6"):
        raise UnsupportedFormatError(path, 0, f"only binary PGM (P5) is supported, got {magic}")
    if magic != "P5":
        raise ParseError(path, 0, f"bad PGM magic {magic!r}")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as e:
        raise ParseError(path, 2, f"bad PGM header values {tokens[1:]}") from e
    if width < 1 or height < 1 or maxval < 1:
        raise ParseError(path, 2, f"bad PGM header values {tokens[1:]}")
    if maxval > 255:
        raise UnsupportedFormatError(path, 2, f"maxval {maxval} > 255 (16-bit PGM) is not supported")

    expected = width * height
    payload = data[offset:]
    if len(payload) < expected:
        raise ParseError(
            path, offset, f"truncated payload: expected {expected} bytes, got {len(payload)}"
        )
    if len(payload) > expected:
        raise ParseError(path, offset + expected, "trailing bytes after PGM payload")

    mask = np.frombuffer(payload, dtype=np.uint8).reshape(height, width).copy()
    if mask.max(initial=0) > maxval:
        raise DataError(path, offset, f"mask value exceeds maxval {maxval}")
    return mask


def write_pgm_mask(mask: np.ndarray, path: PathLike) -> Path:
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError(f"mask must be 2D, got shape {mask.shape}")
    if mask.size and (mask.min() < 0 or mask.max() > 255):
        raise ValueError("mask ids must fit in a byte")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    height, width = mask.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    path.write_bytes(header + np.ascontiguousarray(mask, dtype=np.uint8).tobytes())
    return path
