from __future__ import annotations

import argparse
import importlib
import pathlib
import pkgutil
from typing import ClassVar, Sequence

from ..config import OutputFormat, RunConfig
from ...matrix_core import DEFAULT_ROW_SUM_TOL, PIVOT_RELATIVE_THRESHOLD
from ...matrix_io import MatrixFormat
from ...sensitivities import CAPACITANCE_RELATIVE_THRESHOLD, PROBABILITY_SLACK


class Command:
  """
  Base class for all CLI commands.

  - Subclasses auto-register themselves and inherit their parent's path.
  - `Command.build_parser()` builds the whole argparse command tree.
  - `Command.build_subparser()` builds command subtrees recursively.
  """

  registry: ClassVar[dict[tuple[str, ...], type[Command]]] = {}
  """Registry of subclasses mapping path -> subclass"""

  children: ClassVar[dict[tuple[str, ...], list[tuple[str, ...]]]] = {}
  """Map of child classes"""

  path: ClassVar[tuple[str, ...]]
  """Command path"""

  inputs: ClassVar[tuple[str, ...]] = ()
  """Argument names holding input file paths"""

  def __init_subclass__(cls, **kwargs) -> None:
    super().__init_subclass__(**kwargs)

    if cls is Command:
      return

    base = cls.__bases__[0]
    name = cls.__name__.lower()

    cls.path = (*base.path, name) if getattr(base, "path", None) else (name,)
    Command.registry[cls.path] = cls

    parent_path = cls.path[:-1]
    Command.children.setdefault(parent_path, []).append(cls.path)

  @classmethod
  def build_parser(cls, **kwargs) -> argparse.ArgumentParser:
    """
    Build and return the full argparse parser.
    """
    parser = argparse.ArgumentParser(**kwargs)
    subparsers = parser.add_subparsers(dest="command", title="commands", required=True)

    # top-level commands are those with a single segment path
    roots = [p for p in cls.registry if len(p) == 1]

    for path in sorted(roots):
      command_cls = cls.registry[path]
      command_cls.build_subparser(subparsers)

    return parser

  @classmethod
  def build_subparser(cls, parent_subparsers: argparse._SubParsersAction[argparse.ArgumentParser]) -> argparse.ArgumentParser:
    """
    Create a subparser for this command under the given parent_subparsers.
    Recursively adds child commands.
    """

    segment = cls.path[-1]
    help_text = (cls.__doc__ or "").strip() or None

    parser = parent_subparsers.add_parser(segment, help=help_text, description=help_text)

    if cls.path in Command.children:
      # group command
      subparser = parser.add_subparsers(dest=f"{segment}_command", title=f"{segment} commands", required=True)

      for child_path in sorted(Command.children[cls.path]):
        child_cls = Command.registry[child_path]
        child_cls.build_subparser(subparser)

    else:
      # leaf command
      cls.add_arguments(parser)
      parser.set_defaults(handler=cls.run, input_args=cls.inputs)

    return parser

  @classmethod
  def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
    """Override in subclasses to define arguments."""
    parser.add_argument("--debug", action="store_true")
    parser.add_argument("-o", "--output", help="write results to this file instead of standard output")
    parser.add_argument("--threads", type=positive_int, help="worker threads (default: $MC_SENSE_THREADS or the CPU count)")

  @classmethod
  def run(cls, args: argparse.Namespace, config: RunConfig) -> None:
    """Override in subclasses to implement the command."""
    raise NotImplementedError("Leaf commands must implement run()")


# --------------------------------------------------
# Argument Types
# --------------------------------------------------


def positive_int(value: str) -> int:
  number = int(value)
  if number < 1:
    raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
  return number


def nonnegative_float(value: str) -> float:
  number = float(value)
  if not number >= 0:
    raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {value}")
  return number


def int_list(value: str) -> list[int]:
  try:
    return [int(item) for item in value.split(",") if item.strip()]
  except ValueError as e:
    raise argparse.ArgumentTypeError(f"expected comma separated integers, got {value}") from e


def float_list(value: str) -> list[float]:
  try:
    return [float(item) for item in value.split(",") if item.strip()]
  except ValueError as e:
    raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {value}") from e


def add_format_argument(parser: argparse.ArgumentParser) -> None:
  parser.add_argument(
    "--format",
    choices=[fmt.value for fmt in MatrixFormat],
    help="input matrix format (default: from the file suffix, .mtx/.mm for Matrix Market)",
  )


def matrix_format(args: argparse.Namespace) -> MatrixFormat | None:
  return MatrixFormat(args.format) if args.format else None


def add_output_format_argument(parser: argparse.ArgumentParser, formats: Sequence[OutputFormat]) -> None:
  parser.add_argument(
    "--output-format",
    choices=[fmt.value for fmt in formats],
    default=OutputFormat.CSV.value,
    help="output format (default: csv)",
  )


def add_tolerance_arguments(parser: argparse.ArgumentParser, solver: bool = True, capacitance: bool = False) -> None:
  parser.add_argument("--tol", type=nonnegative_float, default=DEFAULT_ROW_SUM_TOL, help="row sum tolerance")
  if not solver:
    return

  parser.add_argument("--pivot-threshold", type=nonnegative_float, default=PIVOT_RELATIVE_THRESHOLD, help="relative pivot threshold of LU")
  parser.add_argument("--probability-slack", type=nonnegative_float, default=PROBABILITY_SLACK, help="round-off clamped in probabilities")
  if capacitance:
    parser.add_argument(
      "--capacitance-threshold",
      type=nonnegative_float,
      default=CAPACITANCE_RELATIVE_THRESHOLD,
      help="relative determinant below which a column falls back to direct solves",
    )


def solver_options(args: argparse.Namespace) -> dict[str, float]:
  """Keyword arguments for the sensitivity solvers from `add_tolerance_arguments` flags."""
  options = {"slack": args.probability_slack, "pivot": args.pivot_threshold}
  if hasattr(args, "capacitance_threshold"):
    options["threshold"] = args.capacitance_threshold
  return options


# --------------------------------------------------
# Automatic Import
# --------------------------------------------------

pkg_dir = pathlib.Path(__file__).parent

for module in pkgutil.iter_modules([str(pkg_dir)]):
  importlib.import_module(f"{__name__}.{module.name}")
