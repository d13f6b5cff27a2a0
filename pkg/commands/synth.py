from pathlib import Path

import click

from services.scene_synthesizer import PRESETS, generate_scene, load_scene_config, preset_config
from utils.config import DEFAULT_FRAME_GAP
from utils.errors import CuratorError


@click.command()
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="YAML scene configuration.",
)
@click.option("--preset", type=click.Choice(sorted(PRESETS)), default=None)
@click.option("--seed", type=int, default=None, help="Override the configured seed.")
@click.option("--frames", type=click.IntRange(min=2), default=None)
@click.option(
    "--videos",
    type=click.IntRange(min=1),
    default=1,
    help="Number of bundles; bundle k uses seed + k and is written to <out>/video_<k>.",
)
@click.option("--frame-gap", type=click.IntRange(min=1), default=DEFAULT_FRAME_GAP, show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False, path_type=Path))
def synth(config_path, preset, seed, frames, videos, frame_gap, out):
    """Generate synthetic video bundles with ground-truth motion."""
    if (config_path is None) == (preset is None):
        raise click.UsageError("give exactly one of --config and --preset")

    try:
        config = load_scene_config(config_path) if config_path else preset_config(preset)
    except CuratorError as e:
        raise click.ClickException(str(e))
    overrides = {}
    if seed is not None:
        overrides["seed"] = seed
    if frames is not None:
        overrides["frames"] = frames
    config = config.model_copy(update=overrides)

    for k in range(videos):
        target = out if videos == 1 else out / f"video_{k:03d}"
        try:
            bundle = generate_scene(
                config.model_copy(update={"seed": config.seed + k}), target, frame_gap=frame_gap
            )
        except CuratorError as e:
            raise click.ClickException(str(e))
        strengths = ", ".join(f"{i}: {s:.6g}" for i, s in sorted(bundle.analytic_strength.items()))
        click.echo(f"✅ {target}: analytic strength {{{strengths}}}")


COMMANDS = [synth]
