import argparse
import logging

from . import Command, add_format_argument, add_tolerance_arguments, matrix_format, positive_int, solver_options
from ..config import RunConfig
from ...matrix_core import validate_stochastic, validate_substochastic
from ...matrix_io import read_matrix, write_rows
from ...mc_verify import DEFAULT_SAMPLES, McEstimate, check_decomposition, estimate_occupation, estimate_q
from ...sensitivities import q_single
from ...stationary import occupation_matrix

HEADER = ["quantity", "i", "j", "m", "point", "stderr", "n", "seed", "exact", "z"]


class Verify(Command):
  """Compare Monte Carlo estimates with the deterministic values"""

  inputs = ("matrix",)

  @classmethod
  def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
    super().add_arguments(parser)
    parser.add_argument("matrix", help="substochastic S for q, stochastic F otherwise")
    parser.add_argument("i", type=int)
    parser.add_argument("j", type=int)
    parser.add_argument("--n", type=positive_int, default=DEFAULT_SAMPLES, help="number of trajectories")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--quantity", choices=["q", "occupation", "decomposition"], default="q")
    parser.add_argument("-m", type=int, help="counted state for occupation (default: j) and decomposition")
    add_tolerance_arguments(parser)
    add_format_argument(parser)

  @classmethod
  def run(cls, args: argparse.Namespace, config: RunConfig) -> None:
    matrix = read_matrix(args.matrix, matrix_format(args))
    i, j, m = args.i, args.j, args.m

    if args.quantity == "q":
      S = validate_substochastic(matrix, args.tol)
      estimate = estimate_q(S, i, j, args.n, args.seed, config.threads)
      exact = q_single(S, i, j, **solver_options(args)) if S.irreducible else None
      rows = [row("q", i, j, None, estimate, exact)]

    elif args.quantity == "occupation":
      F = validate_stochastic(matrix, args.tol)
      m = j if m is None else m
      estimate = estimate_occupation(F, j, i, m, args.n, args.seed, config.threads)
      exact = float(occupation_matrix(F, i).full()[j, m])
      rows = [row("occupation", i, j, m, estimate, exact)]

    else:
      F = validate_stochastic(matrix, args.tol)
      lhs, rhs = check_decomposition(F, i, j, args.n, args.seed, m=m, threads=config.threads)
      N = occupation_matrix(F, i).full()
      visits = N[j].sum() if m is None else N[j, m]
      exact = q_single(F, i, j, **solver_options(args)) * visits
      rows = [row("decomposition_lhs", i, j, m, lhs, exact), row("decomposition_rhs", i, j, m, rhs, exact)]

    for values in rows:
      logging.info(f"{values[0]}: estimate {values[4]:.6g} +- {values[5]:.2g}, exact {values[8]}")

    with config.open_output() as out:
      write_rows(out, rows, header=HEADER)


def row(quantity: str, i: int, j: int, m: int | None, estimate: McEstimate, exact: float | None) -> list:
  z = estimate.z_score(exact) if exact is not None else None
  return [quantity, i, j, m, estimate.point, estimate.stderr, estimate.n, estimate.seed, exact, z]
