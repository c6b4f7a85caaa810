"""
mcsense CLI Run Configuration
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import os
import sys
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import IO, Iterator

from ..mc_verify import default_threads


class OutputFormat(Enum):
  CSV = "csv"
  MATRIX_MARKET = "mm"
  TEXT = "text"


@dataclass(frozen=True, slots=True)
class RunConfig:
  """
  Resolved paths and resources of one command run. Every path is checked before any computation.
  """

  inputs: tuple[Path, ...]
  output: Path | None
  output_dir: Path | None
  threads: int
  debug: bool
  output_format: OutputFormat = OutputFormat.CSV

  @classmethod
  def from_args(cls, args: argparse.Namespace) -> RunConfig:
    inputs = tuple(Path(getattr(args, name)) for name in getattr(args, "input_args", ()) if getattr(args, name, None))
    output = Path(args.output) if getattr(args, "output", None) else None
    output_dir = Path(args.output_dir) if getattr(args, "output_dir", None) else None
    threads = getattr(args, "threads", None) or default_threads()
    output_format = OutputFormat(getattr(args, "output_format", None) or OutputFormat.CSV.value)

    config = cls(inputs=inputs, output=output, output_dir=output_dir, threads=threads, debug=args.debug, output_format=output_format)
    config.check()
    return config

  def check(self) -> None:
    for path in self.inputs:
      if not path.is_file():
        raise FileNotFoundError(f"Input file not found: {path}")
      if not os.access(path, os.R_OK):
        raise PermissionError(f"Input file is not readable: {path}")

    if self.output is not None:
      parent = self.output.parent if str(self.output.parent) else Path(".")
      if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise PermissionError(f"Output directory is not writable: {parent}")

    if self.output_dir is not None:
      if not self.output_dir.is_dir() or not os.access(self.output_dir, os.W_OK):
        raise PermissionError(f"Output directory is not writable: {self.output_dir}")

    logging.debug(f"Run configuration: {self}")

  @contextlib.contextmanager
  def open_output(self) -> Iterator[IO[str]]:
    """The output file, or standard output when none was given."""
    if self.output is None:
      yield sys.stdout
      return

    with open(self.output, "w", newline="") as f:
      yield f

  @contextlib.contextmanager
  def open_binary_output(self) -> Iterator[IO[bytes]]:
    """Binary counterpart of `open_output` for Matrix Market files."""
    if self.output is None:
      yield sys.stdout.buffer
      return

    with open(self.output, "wb") as f:
      yield f
