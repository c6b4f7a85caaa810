import argparse
import logging

from . import Command, add_format_argument, add_output_format_argument, add_tolerance_arguments, matrix_format, solver_options
from ..config import OutputFormat, RunConfig
from ...matrix_core import validate_substochastic
from ...matrix_io import read_matrix, write_matrix_market, write_rows
from ...sensitivities import SensitivitySource, compute_sensitivities


class Sensitivities(Command):
  """Compute the sensitivities Q_ij(S) of a substochastic matrix"""

  inputs = ("matrix",)

  @classmethod
  def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
    super().add_arguments(parser)
    parser.add_argument("matrix", help="irreducible substochastic matrix S (CSV or Matrix Market)")
    method = parser.add_mutually_exclusive_group()
    method.add_argument("--fast", dest="source", action="store_const", const=SensitivitySource.FAST, help="one inversion (default)")
    method.add_argument("--oracle", dest="source", action="store_const", const=SensitivitySource.ORACLE, help="one solve per pair")
    parser.set_defaults(source=SensitivitySource.FAST)
    parser.add_argument("--heatmap", action="store_true", help="write (i, j, -log Q_ij) triples instead of the matrix")
    add_tolerance_arguments(parser, capacitance=True)
    add_format_argument(parser)
    add_output_format_argument(parser, [OutputFormat.CSV, OutputFormat.MATRIX_MARKET])

  @classmethod
  def run(cls, args: argparse.Namespace, config: RunConfig) -> None:
    S = validate_substochastic(read_matrix(args.matrix, matrix_format(args)), args.tol)
    Q = compute_sensitivities(S, args.source, **solver_options(args))
    logging.info(f"Computed {S.dim}x{S.dim} sensitivities ({Q.source.value})")
    if Q.fallback_columns:
      logging.info(f"Columns computed by direct solves: {list(Q.fallback_columns)}")

    if config.output_format is OutputFormat.MATRIX_MARKET and not args.heatmap:
      with config.open_binary_output() as out:
        write_matrix_market(out, Q.Q)
      return

    with config.open_output() as out:
      if args.heatmap:
        neg_log = Q.neg_log()
        write_rows(out, ([i, j, float(neg_log[i, j])] for i, j, _ in Q.off_diagonal()), header=["i", "j", "neg_log_q"])
      else:
        write_rows(out, Q.Q.tolist())
