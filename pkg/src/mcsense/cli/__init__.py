"""
mcsense CLI
"""

import logging
import sys

from .. import exceptions
from . import commands
from .config import RunConfig

#: Errors reported as `error: <Name>: <message>` with exit status 1
REPORTED_ERRORS = (
  exceptions.MatrixError,
  exceptions.SensitivityError,
  exceptions.BoundError,
  exceptions.SimulationError,
  OSError,
  ValueError,
)


def main(argv: list[str] | None = None) -> int:
  """
  Entry point for the mcsense CLI.
  Builds the full command parser, checks the run configuration and dispatches to the handler.
  """
  parser = commands.Command.build_parser(prog="mcsense", description="Sensitivity of Markov chain invariant distributions")
  args = parser.parse_args(argv)

  loglevel = logging.DEBUG if args.debug else logging.INFO
  logging.basicConfig(level=loglevel, format="%(asctime)s %(levelname)s %(message)s")

  try:
    config = RunConfig.from_args(args)
    args.handler(args, config)
  except KeyboardInterrupt:
    logging.info("Exiting.")
    return 130
  except REPORTED_ERRORS as e:
    logging.debug("Command failed", exc_info=True)
    print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
    return 1

  return 0
