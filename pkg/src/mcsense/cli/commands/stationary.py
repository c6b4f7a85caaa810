import argparse
import logging

from . import Command, add_format_argument, add_tolerance_arguments, matrix_format
from ..config import RunConfig
from ...matrix_core import validate_stochastic
from ...matrix_io import read_matrix, write_rows
from ...stationary import stationary_distribution, stationary_via_minors


class Stationary(Command):
  """Compute the invariant distribution of an irreducible stochastic matrix"""

  inputs = ("matrix",)

  @classmethod
  def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
    super().add_arguments(parser)
    parser.add_argument("matrix", help="stochastic matrix (CSV or Matrix Market)")
    add_tolerance_arguments(parser, solver=False)
    parser.add_argument("--method", choices=["solve", "minors"], default="solve")
    add_format_argument(parser)

  @classmethod
  def run(cls, args: argparse.Namespace, config: RunConfig) -> None:
    F = validate_stochastic(read_matrix(args.matrix, matrix_format(args)), args.tol)
    dist = stationary_via_minors(F) if args.method == "minors" else stationary_distribution(F)
    logging.info(f"Invariant distribution of {F.dim} states, residual {dist.residual:.3e}")

    header = [f"pi_{k}" for k in range(F.dim)] + ["residual"]
    with config.open_output() as out:
      write_rows(out, [[*dist.pi.tolist(), dist.residual]], header=header)
