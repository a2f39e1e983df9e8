import sys
from typing import Annotated, Optional, Sequence

import typer

from app.config import configure_logging, settings
from app.controllers import runs_router
from app.utils.error_handlers import EXIT_OK, handle_cli_error

app = typer.Typer(
    name=settings.app_name,
    help="""
(S)-convergence toolkit.

Generates field sequences (synthetic fixtures or finite-volume Euler families),
estimates their (S)-limit measures from weighted ergodic averages, perturbs them on
sparse index sets, and merges the resulting reports into plot-ready tables.
""",
    add_completion=False,
    no_args_is_help=True,
)


@app.callback()
def main(
    log_level: Annotated[Optional[str], typer.Option("--log-level", help="Logging level (default from SCONV_LOG_LEVEL)")] = None,
):
    configure_logging(log_level)


# Include the workflow commands at the top level
app.registered_commands.extend(runs_router.registered_commands)


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the CLI and return its exit code instead of exiting

    Args:
        argv: Arguments without the program name; defaults to sys.argv[1:]

    Returns:
        0 on success, 1 on validation or usage errors, 2 on runtime failures
    """
    args = list(sys.argv[1:] if argv is None else argv)
    command = typer.main.get_command(app)
    try:
        result = command.main(args=args, prog_name=settings.app_name, standalone_mode=False)
    except Exception as error:
        return handle_cli_error(error)
    return result if isinstance(result, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(run_cli())
