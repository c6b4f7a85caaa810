"""
mcsense Matrix IO

Dense CSV and Matrix Market readers and writers.
"""

from __future__ import annotations

import csv
import io
import logging
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np
import scipy.io
import scipy.sparse

from . import exceptions


class MatrixFormat(Enum):
  CSV = "csv"
  MATRIX_MARKET = "mm"

  @classmethod
  def from_path(cls, path: str | Path) -> MatrixFormat:
    return cls.MATRIX_MARKET if Path(path).suffix.lower() in (".mtx", ".mm") else cls.CSV


# --------------------------------------------------
# Formatting
# --------------------------------------------------


def format_float(value: float | None) -> str:
  """
  Shortest decimal string that round-trips to the same binary64 value.

  NaN and None are written as an empty cell.
  """
  if value is None:
    return ""
  value = float(value)
  if np.isnan(value):
    return ""
  return repr(value)


def format_cell(value) -> str:
  if isinstance(value, (float, np.floating)):
    return format_float(value)
  if value is None:
    return ""
  return str(value)


# --------------------------------------------------
# Readers
# --------------------------------------------------


def _parse_row(cells: Sequence[str]) -> list[float] | None:
  try:
    return [float(cell) for cell in cells]
  except ValueError:
    return None


def read_csv(stream: IO[str]) -> np.ndarray:
  """
  Reads a dense row-major matrix. A first row that does not parse as numbers is taken as a header.
  """
  rows: list[list[float]] = []
  for lineno, cells in enumerate(csv.reader(stream), start=1):
    cells = [cell.strip() for cell in cells]
    if not cells or all(not cell for cell in cells):
      continue

    values = _parse_row(cells)
    if values is None:
      if not rows and lineno == 1:
        logging.debug(f"Skipping CSV header: {cells}")
        continue
      col = next(k for k, cell in enumerate(cells) if _parse_row([cell]) is None)
      raise exceptions.MatrixFormatError(f"Line {lineno}, column {col}: cannot parse {cells[col]!r} as a number")

    if rows and len(values) != len(rows[0]):
      raise exceptions.MatrixFormatError(f"Line {lineno}: expected {len(rows[0])} columns, got {len(values)}")
    rows.append(values)

  if not rows:
    raise exceptions.MatrixFormatError("No matrix rows found")
  return np.array(rows, dtype=float)


def read_matrix_market(source: str | Path | IO[bytes]) -> np.ndarray:
  try:
    matrix = scipy.io.mmread(source)
  except (ValueError, IndexError) as e:
    raise exceptions.MatrixFormatError(f"Invalid Matrix Market data: {e}") from e

  if scipy.sparse.issparse(matrix):
    matrix = matrix.toarray()
  return np.asarray(matrix, dtype=float)


def read_matrix(path: str | Path, fmt: MatrixFormat | None = None) -> np.ndarray:
  """
  Reads a matrix from `path`, choosing the format from the suffix unless `fmt` is given.

  :param path: input file
  :param fmt: explicit format
  :return: the matrix entries
  :rtype: np.ndarray
  """
  fmt = fmt or MatrixFormat.from_path(path)
  logging.debug(f"Reading {fmt.value} matrix from {path}")

  if fmt is MatrixFormat.MATRIX_MARKET:
    with open(path, "rb") as f:
      return read_matrix_market(f)
  with open(path, newline="") as f:
    return read_csv(f)


def read_alpha(value: str) -> float | np.ndarray:
  """Parses an error budget given either as a scalar or as a path to a matrix file."""
  try:
    return float(value)
  except ValueError:
    return read_matrix(value)


# --------------------------------------------------
# Writers
# --------------------------------------------------


def write_rows(stream: IO[str], rows: Iterable[Sequence], header: Sequence[str] | None = None) -> None:
  """Writes RFC-4180 style rows with shortest round-trip floats."""
  writer = csv.writer(stream, lineterminator="\n")
  if header is not None:
    writer.writerow(header)
  for row in rows:
    writer.writerow([format_cell(value) for value in row])


def write_csv(stream: IO[str], matrix: np.ndarray) -> None:
  write_rows(stream, np.asarray(matrix, dtype=float).tolist())


def write_matrix_market(target: str | Path | IO[bytes], matrix: np.ndarray, coordinate: bool = False) -> None:
  matrix = np.asarray(matrix, dtype=float)
  data = scipy.sparse.coo_matrix(matrix) if coordinate else matrix
  scipy.io.mmwrite(target, data, precision=17)


def write_matrix(path: str | Path, matrix: np.ndarray, fmt: MatrixFormat | None = None) -> None:
  fmt = fmt or MatrixFormat.from_path(path)
  logging.debug(f"Writing {fmt.value} matrix to {path}")

  if fmt is MatrixFormat.MATRIX_MARKET:
    # a plain filename would get ".mtx" appended
    with open(path, "wb") as f:
      write_matrix_market(f, matrix)
    return
  with open(path, "w", newline="") as f:
    write_csv(f, matrix)


def matrix_to_csv(matrix: np.ndarray) -> str:
  buffer = io.StringIO()
  write_csv(buffer, matrix)
  return buffer.getvalue()
