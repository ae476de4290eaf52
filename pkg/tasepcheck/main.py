import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from tasepcheck.cli.commands import COMMANDS, build_parser, run_config_from_args
from tasepcheck.cli.output import write_rows
from tasepcheck.core.config import load_settings
from tasepcheck.core.errors import ArgumentError, TasepError

logger = logging.getLogger("tasepcheck")

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_USAGE = 2
EXIT_ERROR = 3


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one subcommand and write its rows. Returns the process exit code."""
    args = build_parser().parse_args(argv)

    try:
        settings = load_settings(args.config)
    except (FileNotFoundError, ValidationError) as e:
        print(f"tasepcheck: invalid configuration: {e}", file=sys.stderr)
        return EXIT_USAGE

    # Setup logging; stdout carries the result rows
    logging.basicConfig(
        level=settings.LOG_LEVEL,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )

    try:
        config = run_config_from_args(args, settings)
        output = COMMANDS[config.command](config, workers=args.workers or settings.worker_count())
        if config.output_path:
            with open(config.output_path, "w", encoding="utf-8", newline="") as stream:
                write_rows(output.rows, output.columns, config.output_format, stream)
        else:
            write_rows(output.rows, output.columns, config.output_format, sys.stdout)
    except (ArgumentError, ValidationError) as e:
        logger.error(f"Invalid arguments: {e}")
        return EXIT_USAGE
    except TasepError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.error(f"Unhandled exception: {e}", exc_info=True)
        return EXIT_ERROR

    if output.failed:
        logger.warning(f"{config.command}: verification failed")
        return EXIT_VERIFICATION_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
