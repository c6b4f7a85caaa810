import argparse
import logging

from . import Command, add_format_argument, add_tolerance_arguments, matrix_format, nonnegative_float
from ..config import RunConfig
from ...bounds import sparsification_report
from ...matrix_core import validate_stochastic
from ...matrix_io import read_matrix, write_rows


class Sparsify(Command):
  """Drop small transition probabilities and bound the effect on the invariant distribution"""

  inputs = ("matrix",)

  @classmethod
  def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
    super().add_arguments(parser)
    parser.add_argument("matrix", help="stochastic matrix")
    parser.add_argument("--threshold", type=nonnegative_float, required=True, help="drop off-diagonal entries below this value")
    add_tolerance_arguments(parser, solver=False)
    add_format_argument(parser)

  @classmethod
  def run(cls, args: argparse.Namespace, config: RunConfig) -> None:
    F = validate_stochastic(read_matrix(args.matrix, matrix_format(args)), args.tol)
    result = sparsification_report(F, args.threshold)
    for name, value in result.report.rows():
      logging.info(f"{name}: {value}")

    rows = ([e.i, e.j, e.value, e.sensitivity, e.value * e.sensitivity] for e in result.dropped)
    with config.open_output() as out:
      write_rows(out, rows, header=["i", "j", "value", "sensitivity", "contribution"])
