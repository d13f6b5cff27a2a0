"""
COLMAP text model reader/writer (cameras.txt, images.txt, points3D.txt).

Only PINHOLE and SIMPLE_PINHOLE cameras are accepted. Floats are written with
17 significant digits so parse -> serialize -> parse is field-exact.
"""

import logging
from pathlib import Path
from typing import Dict, Iterator, List, Tuple, Union

import numpy as np
from pydantic import ValidationError

from models.sfm import SfmCamera, SfmFrame, SfmModel, SparseCloud, SparsePoint
from utils.errors import IntegrityError, ParseError, UnsupportedFormatError

logger = logging.getLogger(__name__)

SUPPORTED_MODELS = {"SIMPLE_PINHOLE": 3, "PINHOLE": 4}
QUATERNION_TOL = 1e-6


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _data_lines(path: Path) -> Iterator[Tuple[int, str]]:
    """(line number, stripped line) for every non-comment line, blank lines included"""
    if not path.exists():
        raise ParseError(path, None, "file not found")
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if line.startswith("#"):
                continue
            yield lineno, line


def _read_cameras(path: Path) -> Dict[int, SfmCamera]:
    cameras: Dict[int, SfmCamera] = {}
    for lineno, line in _data_lines(path):
        if not line:
            continue
        elems = line.split()
        if len(elems) < 4:
            raise ParseError(path, lineno, "camera record needs CAMERA_ID MODEL WIDTH HEIGHT PARAMS[]")
        model = elems[1]
        if model not in SUPPORTED_MODELS:
            raise UnsupportedFormatError(path, lineno, f"unsupported camera model {model}")
        try:
            camera = SfmCamera(
                camera_id=int(elems[0]),
                model=model,
                width=int(elems[2]),
                height=int(elems[3]),
                params=tuple(float(p) for p in elems[4:]),
            )
            camera.intrinsics
        except (ValueError, ValidationError) as e:
            raise ParseError(path, lineno, f"malformed camera record: {e}") from e
        if camera.camera_id in cameras:
            raise IntegrityError(path, lineno, f"duplicate camera id {camera.camera_id}")
        cameras[camera.camera_id] = camera
    return cameras


def _parse_points2d(path: Path, lineno: int, line: str) -> Tuple[Tuple[float, float, int], ...]:
    elems = line.split()
    if len(elems) % 3:
        raise ParseError(path, lineno, "2D point line must hold X Y POINT3D_ID triples")
    try:
        return tuple(
            (float(elems[k]), float(elems[k + 1]), int(elems[k + 2]))
            for k in range(0, len(elems), 3)
        )
    except ValueError as e:
        raise ParseError(path, lineno, f"malformed 2D point: {e}") from e


def _read_images(path: Path, cameras: Dict[int, SfmCamera]) -> List[SfmFrame]:
    frames: Dict[int, SfmFrame] = {}
    pending = None
    for lineno, line in _data_lines(path):
        if pending is None:
            if not line:
                continue
            elems = line.split()
            if len(elems) < 10:
                raise ParseError(
                    path, lineno, "image record needs IMAGE_ID QW QX QY QZ TX TY TZ CAMERA_ID NAME"
                )
            try:
                header = dict(
                    image_id=int(elems[0]),
                    qvec=tuple(float(q) for q in elems[1:5]),
                    tvec=tuple(float(t) for t in elems[5:8]),
                    camera_id=int(elems[8]),
                    name=" ".join(elems[9:]),
                )
            except ValueError as e:
                raise ParseError(path, lineno, f"malformed image record: {e}") from e
            pending = (lineno, header)
            continue

        header_line, header = pending
        pending = None
        try:
            frame = SfmFrame(points2d=_parse_points2d(path, lineno, line), **header)
        except ValidationError as e:
            raise ParseError(path, header_line, f"malformed image record: {e}") from e

        norm = float(np.linalg.norm(frame.qvec))
        if abs(norm - 1.0) > QUATERNION_TOL:
            logger.warning("%s:%d: quaternion norm %.9f renormalized", path, header_line, norm)
        if frame.camera_id not in cameras:
            raise IntegrityError(
                path, header_line, f"image {frame.image_id} references missing camera {frame.camera_id}"
            )
        if frame.image_id in frames:
            raise IntegrityError(path, header_line, f"duplicate image id {frame.image_id}")
        frames[frame.image_id] = frame

    if pending is not None:
        raise ParseError(path, pending[0], "image record is missing its 2D point line")
    return sorted(frames.values(), key=lambda f: f.name)


def _read_points(path: Path) -> SparseCloud:
    points: Dict[int, SparsePoint] = {}
    for lineno, line in _data_lines(path):
        if not line:
            continue
        elems = line.split()
        if len(elems) < 8 or (len(elems) - 8) % 2:
            raise ParseError(
                path, lineno, "point record needs POINT3D_ID X Y Z R G B ERROR TRACK[] pairs"
            )
        try:
            point = SparsePoint(
                point_id=int(elems[0]),
                xyz=tuple(float(x) for x in elems[1:4]),
                rgb=tuple(int(c) for c in elems[4:7]),
                error=float(elems[7]),
                track=tuple(
                    (int(elems[k]), int(elems[k + 1])) for k in range(8, len(elems), 2)
                ),
            )
        except (ValueError, ValidationError) as e:
            raise ParseError(path, lineno, f"malformed point record: {e}") from e
        if point.point_id in points:
            raise IntegrityError(path, lineno, f"duplicate point id {point.point_id}")
        points[point.point_id] = point
    return SparseCloud(points=tuple(points.values()))


def parse_colmap_text(directory: Union[str, Path]) -> SfmModel:
    directory = Path(directory)
    cameras = _read_cameras(directory / "cameras.txt")
    frames = _read_images(directory / "images.txt", cameras)
    cloud = _read_points(directory / "points3D.txt")
    logger.debug(
        "parsed %s: %d cameras, %d frames, %d points",
        directory,
        len(cameras),
        len(frames),
        len(cloud),
    )
    return SfmModel(cameras=cameras, frames=frames, cloud=cloud)


def serialize_colmap_text(model: SfmModel, directory: Union[str, Path]) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    lines = [
        "# Camera list with one line of data per camera:",
        "#   CAMERA_ID, MODEL, WIDTH, HEIGHT, PARAMS[]",
        f"# Number of cameras: {len(model.cameras)}",
    ]
    for camera_id in sorted(model.cameras):
        camera = model.cameras[camera_id]
        params = " ".join(_fmt(p) for p in camera.params)
        lines.append(f"{camera.camera_id} {camera.model} {camera.width} {camera.height} {params}")
    (directory / "cameras.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = [
        "# Image list with two lines of data per image:",
        "#   IMAGE_ID, QW, QX, QY, QZ, TX, TY, TZ, CAMERA_ID, NAME",
        "#   POINTS2D[] as (X, Y, POINT3D_ID)",
        f"# Number of images: {len(model.frames)}",
    ]
    for frame in model.frames:
        pose = " ".join(_fmt(x) for x in (*frame.qvec, *frame.tvec))
        lines.append(f"{frame.image_id} {pose} {frame.camera_id} {frame.name}")
        lines.append(" ".join(f"{_fmt(x)} {_fmt(y)} {pid}" for x, y, pid in frame.points2d))
    (directory / "images.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = [
        "# 3D point list with one line of data per point:",
        "#   POINT3D_ID, X, Y, Z, R, G, B, ERROR, TRACK[] as (IMAGE_ID, POINT2D_IDX)",
        f"# Number of points: {len(model.cloud)}",
    ]
    for point in model.cloud.points:
        xyz = " ".join(_fmt(c) for c in point.xyz)
        rgb = " ".join(str(c) for c in point.rgb)
        track = " ".join(f"{image_id} {idx}" for image_id, idx in point.track)
        lines.append(f"{point.point_id} {xyz} {rgb} {_fmt(point.error)} {track}".rstrip())
    (directory / "points3D.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")

    return directory
