import argparse
import logging

import numpy as np

from . import Command, add_format_argument, add_output_format_argument, add_tolerance_arguments, matrix_format, solver_options
from ..config import OutputFormat, RunConfig
from ...bounds import BoundReport, bound_report, lower_envelope
from ...matrix_core import validate_stochastic, validate_substochastic
from ...matrix_io import read_alpha, read_matrix, write_rows
from ...sensitivities import SensitivitySource, compute_sensitivities


class Bounds(Command):
  """Bound the relative error of the invariant distribution between F and a perturbed F~"""

  inputs = ("F", "Ftilde", "lower")

  @classmethod
  def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
    super().add_arguments(parser)
    parser.add_argument("F", help="stochastic matrix")
    parser.add_argument("Ftilde", help="perturbed stochastic matrix")
    envelope = parser.add_mutually_exclusive_group()
    envelope.add_argument("--lower", help="lower envelope S below both matrices")
    envelope.add_argument("--alpha", help="error budget, a number or a matrix file: S = max(F~ - alpha, 0)")
    envelope.add_argument("--auto-min", action="store_true", help="S = entrywise minimum of F and F~ (default)")
    parser.add_argument("--oracle", action="store_true", help="compute sensitivities by one solve per pair")
    add_tolerance_arguments(parser, capacitance=True)
    add_format_argument(parser)
    add_output_format_argument(parser, [OutputFormat.CSV, OutputFormat.TEXT])

  @classmethod
  def run(cls, args: argparse.Namespace, config: RunConfig) -> None:
    fmt = matrix_format(args)
    F = validate_stochastic(read_matrix(args.F, fmt), args.tol)
    Ftilde = validate_stochastic(read_matrix(args.Ftilde, fmt), args.tol)

    if args.lower:
      S = validate_substochastic(read_matrix(args.lower, fmt), args.tol)
    elif args.alpha:
      S = lower_envelope(Ftilde, read_alpha(args.alpha))
    else:
      S = validate_substochastic(np.minimum(F.entries, Ftilde.entries), args.tol)

    source = SensitivitySource.ORACLE if args.oracle else SensitivitySource.FAST
    Q = compute_sensitivities(S, source, **solver_options(args))
    report = bound_report(F, Ftilde, S=S, Q=Q)
    if report.ocinneide is None:
      logging.info("Sparsity patterns differ, no O'Cinneide bound")

    with config.open_output() as out:
      if config.output_format is OutputFormat.TEXT:
        out.write(format_report(report))
      else:
        write_rows(out, report_rows(report), header=["quantity", "value"])


def report_rows(report: BoundReport) -> list[tuple[str, float | None]]:
  """The bounds followed by one `kappa_<i>` row per state."""
  return [*report.rows(), *((f"kappa_{i}", float(kappa)) for i, kappa in enumerate(report.kappas))]


def format_report(report: BoundReport) -> str:
  lines = ["Bounds on max_m |log pi_m(F~) - log pi_m(F)|"]
  for name, value in report.rows():
    shown = "n/a (sparsity patterns differ)" if value is None else f"{value:.6g}"
    lines.append(f"  {name:<14}{shown}")

  lines.append("Condition numbers kappa_i = max_j E_j[tau_i]")
  lines.extend(f"  {f'kappa_{i}':<14}{kappa:.6g}" for i, kappa in enumerate(report.kappas))

  lines.append(f"Sensitivities: {report.sensitivity_source.value}")
  if report.fallback_columns:
    lines.append(f"Columns computed by direct solves: {list(report.fallback_columns)}")
  return "\n".join(lines) + "\n"
