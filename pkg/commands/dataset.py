from pathlib import Path

import click

from models.report import AnnotateParams, VideoJob, VideoReport
from services.raster_io import read_pgm_mask
from services.report_filter import filter_reports
from services.tracks_io import write_keypoint_queries
from services.video_annotator import annotate_batch, discover_jobs
from utils.config import get_settings
from utils.errors import CuratorError
from utils.jsonio import dump_json

EXIT_PARTIAL = 2


@click.command()
@click.argument(
    "dataset_root",
    required=False,
    type=click.Path(exists=True, file_okay=False, path_type=Path),
)
@click.option(
    "--video-dir",
    "video_dirs",
    multiple=True,
    type=click.Path(file_okay=False, path_type=Path),
    help="Annotate a single video directory; may be repeated.",
)
@click.option("--out", required=True, type=click.Path(file_okay=False, path_type=Path))
@click.option("--frame-gap", type=click.IntRange(min=1), default=lambda: get_settings().frame_gap)
@click.option("--min-sparse", type=click.IntRange(min=1), default=lambda: get_settings().min_sparse)
@click.option("--threshold", type=click.FloatRange(min=0.0), default=lambda: get_settings().threshold)
@click.option("--grid-step", type=click.IntRange(min=1), default=lambda: get_settings().grid_step)
@click.option("--workers", type=click.IntRange(min=1), default=lambda: get_settings().workers)
@click.option(
    "--depth-kind",
    type=click.Choice(["relative", "ground-truth"]),
    default=lambda: get_settings().depth_kind,
)
@click.option("--depth-subdir", default=None, help="Depth directory name inside each video.")
@click.option("--progress/--no-progress", default=True)
@click.pass_context
def annotate(
    ctx,
    dataset_root,
    video_dirs,
    out,
    frame_gap,
    min_sparse,
    threshold,
    grid_step,
    workers,
    depth_kind,
    depth_subdir,
    progress,
):
    """Estimate per-object motion strength for every video and write JSON reports."""
    if dataset_root is None and not video_dirs:
        raise click.UsageError("give a dataset root or at least one --video-dir")

    params = AnnotateParams(
        frame_gap=frame_gap,
        min_samples=min_sparse,
        threshold=threshold,
        grid_step=grid_step,
        depth_kind=depth_kind,
    )
    jobs = []
    if dataset_root is not None:
        jobs.extend(discover_jobs(dataset_root, params, depth_subdir))
    jobs.extend(VideoJob.from_video_dir(d, params, depth_subdir) for d in video_dirs)
    jobs.sort(key=lambda job: job.video_id)

    try:
        results = annotate_batch(jobs, out, workers=workers, progress=progress)
    except ValueError as e:
        raise click.UsageError(str(e))

    for item in results["success"]:
        marker = "dynamic" if item["is_dynamic"] else "static"
        click.echo(f"✅ {item['video_id']}: strength={item['motion_strength']:.6g} ({marker})")
    for item in results["failed"]:
        click.echo(f"❌ {item['video_id']}: {item['error']}")
    click.echo(
        f"Annotated {len(results['success'])}/{results['total']} videos, "
        f"{len(results['failed'])} failed"
    )
    if results["failed"]:
        ctx.exit(EXIT_PARTIAL)


@click.command("filter")
@click.argument("reports_dir", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--threshold", type=click.FloatRange(min=0.0), default=lambda: get_settings().threshold)
@click.option("--out", required=True, type=click.Path(dir_okay=False, path_type=Path))
def filter_videos(reports_dir, threshold, out):
    """Write the sorted ids of videos whose motion strength reaches the threshold."""
    summary = filter_reports(reports_dir, threshold, out)
    click.echo(
        f"✅ {len(summary['accepted'])} accepted, "
        f"⏭️ {len(summary['below_threshold'])} below threshold, "
        f"❌ {len(summary['rejects'])} rejected (of {summary['total']})"
    )
    if summary["rejects"]:
        click.echo("Rejects:")
        for reject in summary["rejects"]:
            click.echo(f"  {reject['path']}: {reject['reason']}")


@click.command()
@click.argument("mask_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--grid-step", type=click.IntRange(min=1), default=lambda: get_settings().grid_step)
@click.option("--frame", type=click.IntRange(min=0), default=0)
@click.option("--out", required=True, type=click.Path(dir_okay=False, path_type=Path))
def keypoints(mask_path, grid_step, frame, out):
    """Sample query keypoints on a grid over every instance of a mask."""
    try:
        mask = read_pgm_mask(mask_path)
    except CuratorError as e:
        raise click.ClickException(str(e))
    write_keypoint_queries(mask, grid_step, out, frame=frame)
    click.echo(f"✅ Wrote keypoint queries to {out}")


@click.command()
def schema():
    """Print the JSON schema of annotation reports."""
    click.echo(dump_json(VideoReport.model_json_schema(by_alias=True)).decode(), nl=False)


COMMANDS = [annotate, filter_videos, keypoints, schema]
