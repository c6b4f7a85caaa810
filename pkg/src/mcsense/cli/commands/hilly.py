import argparse
import logging
from pathlib import Path
from typing import Final

from . import Command, float_list, int_list
from ..config import RunConfig
from ...hilly import (
  DEFAULT_ALPHAS,
  DEFAULT_GAP_LENGTHS,
  GapRow,
  HillyConfig,
  floor_check,
  gap_scaling_study,
  gap_slope,
  sensitivity_heatmap,
)
from ...matrix_io import format_float, write_rows
from ...sensitivities import SensitivitySource

#: Ring length of the heatmap and floor studies
DEFAULT_LENGTH: Final[int] = 40


class Hilly(Command):
  """Run the hilly landscape studies: spectral gap scaling, sensitivity heatmaps, random walk floors"""

  @classmethod
  def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
    super().add_arguments(parser)
    parser.add_argument("--study", choices=["gap", "heatmap", "floors"], default="heatmap")
    parser.add_argument("--L", type=int_list, help=f"ring lengths (default: {DEFAULT_LENGTH}, or 8,16,24,32,40 for gap)")
    parser.add_argument("--alpha-list", type=float_list, default=list(DEFAULT_ALPHAS), help="scales of S = alpha F")
    parser.add_argument("--output-dir", default=".", help="directory of the heatmap files")
    parser.add_argument("--oracle", action="store_true", help="compute heatmaps by one solve per pair")

  @classmethod
  def run(cls, args: argparse.Namespace, config: RunConfig) -> None:
    if args.study == "gap":
      cls.run_gap(args, config)
    elif args.study == "floors":
      cls.run_floors(args, config)
    else:
      cls.run_heatmap(args, config)

  @classmethod
  def run_gap(cls, args: argparse.Namespace, config: RunConfig) -> None:
    rows = gap_scaling_study(args.L or DEFAULT_GAP_LENGTHS)
    if len(rows) > 1:
      logging.info(f"Least squares slope of log(1/gap): {gap_slope(rows):.6g}")

    with config.open_output() as out:
      write_rows(out, (row.values() for row in rows), header=GapRow.HEADER)

  @classmethod
  def run_floors(cls, args: argparse.Namespace, config: RunConfig) -> None:
    checks = []
    for L in args.L or [DEFAULT_LENGTH]:
      for alpha in args.alpha_list:
        check = floor_check(HillyConfig(L=L), alpha)
        if check.violations or check.neighbor_violations:
          logging.warning(f"L={L}, alpha={alpha}: {check.violations} floor and {check.neighbor_violations} neighbour violations")
        checks.append((L, check))

    rows = ([L, c.alpha, c.violations, c.min_ratio, c.neighbor_violations] for L, c in checks)
    with config.open_output() as out:
      write_rows(out, rows, header=["L", "alpha", "violations", "min_ratio", "neighbor_violations"])

  @classmethod
  def run_heatmap(cls, args: argparse.Namespace, config: RunConfig) -> None:
    source = SensitivitySource.ORACLE if args.oracle else SensitivitySource.FAST
    directory = Path(args.output_dir)

    for L in args.L or [DEFAULT_LENGTH]:
      for alpha in args.alpha_list:
        triples = sensitivity_heatmap(HillyConfig(L=L), alpha, source)
        path = directory / f"hilly_L{L}_alpha{format_float(alpha)}.csv"
        with open(path, "w", newline="") as f:
          write_rows(f, triples, header=["i", "j", "neg_log_q"])
        logging.info(f"Wrote {path}")
