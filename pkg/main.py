import click
from dotenv import find_dotenv, load_dotenv

# Load environment variables
env_file = find_dotenv(usecwd=True)
if env_file:
    load_dotenv(env_file)

from commands.camera import COMMANDS as camera_commands
from commands.dataset import COMMANDS as dataset_commands
from commands.synth import COMMANDS as synth_commands
from utils.config import VERSION, get_settings
from utils.log import configure_logging

# exit code 2 is reserved for partial batch failures
click.UsageError.exit_code = 1


@click.group()
@click.version_option(VERSION, prog_name="motion-curator")
@click.option("--log-level", default=lambda: get_settings().log_level, show_default="INFO")
def cli(log_level):
    """Annotate videos with camera-compensated object motion and filter static ones."""
    configure_logging(log_level)


# Register all command groups
for command in [*dataset_commands, *camera_commands, *synth_commands]:
    cli.add_command(command)


if __name__ == "__main__":
    cli()
