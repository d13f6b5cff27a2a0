import math
from pathlib import Path

import click

from models.camera import Intrinsics
from services.colmap_io import parse_colmap_text, serialize_colmap_text
from services.geometry import plucker_map
from services.plucker_io import write_plucker
from services.trajectory import (
    DEFAULT_INTRINSICS,
    densify_trajectory,
    jitter_trajectory,
    orbit_trajectory,
    trajectory_from_model,
    trajectory_to_model,
)
from utils.errors import CuratorError


@click.command()
@click.argument("colmap_dir", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--out", required=True, type=click.Path(dir_okay=False, path_type=Path))
def plucker(colmap_dir, out):
    """Emit per-frame Plucker ray maps for a COLMAP text model as PLK1."""
    try:
        model = parse_colmap_text(colmap_dir)
    except CuratorError as e:
        raise click.ClickException(str(e))
    if not model.frames:
        raise click.ClickException(f"{colmap_dir} has no images")

    intrinsics = [model.intrinsics_for(frame) for frame in model.frames]
    if len({(intr.width, intr.height) for intr in intrinsics}) > 1:
        raise click.ClickException("cameras with different resolutions are not supported")

    rasters = [plucker_map(frame.pose, intr) for frame, intr in zip(model.frames, intrinsics)]
    try:
        write_plucker(rasters, out, [frame.name for frame in model.frames])
    except CuratorError as e:
        raise click.ClickException(str(e))
    click.echo(f"✅ Wrote {len(rasters)} Plucker maps to {out}")


@click.command()
@click.option("--center", nargs=3, type=float, default=(0.0, 0.0, 0.0), show_default=True)
@click.option("--radius", type=float, default=4.0, show_default=True)
@click.option("--elevation", type=float, default=0.0, show_default=True, help="Degrees.")
@click.option("--n", "n_views", type=click.IntRange(min=1), default=36, show_default=True)
@click.option("--start-azimuth", type=float, default=0.0, show_default=True, help="Degrees.")
@click.option("--arc", type=float, default=360.0, show_default=True, help="Degrees.")
@click.option("--jitter-translation", type=click.FloatRange(min=0.0), default=0.0)
@click.option("--jitter-rotation", type=click.FloatRange(min=0.0), default=0.0, help="Radians.")
@click.option("--seed", type=int, default=0)
@click.option("--width", type=click.IntRange(min=1), default=DEFAULT_INTRINSICS.width)
@click.option("--height", type=click.IntRange(min=1), default=DEFAULT_INTRINSICS.height)
@click.option("--fx", type=float, default=DEFAULT_INTRINSICS.fx)
@click.option("--fy", type=float, default=DEFAULT_INTRINSICS.fy)
@click.option("--cx", type=float, default=DEFAULT_INTRINSICS.cx)
@click.option("--cy", type=float, default=DEFAULT_INTRINSICS.cy)
@click.option("--out", required=True, type=click.Path(file_okay=False, path_type=Path))
def orbit(
    center,
    radius,
    elevation,
    n_views,
    start_azimuth,
    arc,
    jitter_translation,
    jitter_rotation,
    seed,
    width,
    height,
    fx,
    fy,
    cx,
    cy,
    out,
):
    """Write an orbit camera trajectory as a COLMAP text model."""
    try:
        intr = Intrinsics(fx=fx, fy=fy, cx=cx, cy=cy, width=width, height=height)
    except ValueError as e:
        raise click.BadParameter(str(e))
    try:
        trajectory = orbit_trajectory(
            center,
            radius,
            math.radians(elevation),
            n_views,
            intr=intr,
            start_azimuth=math.radians(start_azimuth),
            arc=math.radians(arc),
        )
        if jitter_translation > 0 or jitter_rotation > 0:
            trajectory = jitter_trajectory(trajectory, jitter_translation, jitter_rotation, seed)
    except CuratorError as e:
        raise click.ClickException(str(e))
    serialize_colmap_text(trajectory_to_model(trajectory), out)
    click.echo(f"✅ Wrote {len(trajectory)} orbit views to {out}")


@click.command()
@click.argument("colmap_dir", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--per-segment", type=click.IntRange(min=1), default=8, show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False, path_type=Path))
def densify(colmap_dir, per_segment, out):
    """Interpolate between the poses of a COLMAP model, treating them as anchors."""
    try:
        anchors = trajectory_from_model(parse_colmap_text(colmap_dir))
        trajectory = densify_trajectory(anchors.poses, per_segment, anchors.intr)
    except CuratorError as e:
        raise click.ClickException(str(e))
    serialize_colmap_text(trajectory_to_model(trajectory), out)
    click.echo(f"✅ Densified {len(anchors)} anchors into {len(trajectory)} views in {out}")


COMMANDS = [plucker, orbit, densify]
