"""
mcsense Matrix Core

Validated dense matrices and the linear algebra kernels every other module builds on.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Final

import networkx as nx
import numpy as np
import scipy.linalg

from . import exceptions

#: Default slack allowed on row sums before renormalization
DEFAULT_ROW_SUM_TOL: Final[float] = 1e-12

#: Pivots below this fraction of max|A| are treated as singular
PIVOT_RELATIVE_THRESHOLD: Final[float] = 1e-13


# --------------------------------------------------
# Matrix Types
# --------------------------------------------------


@dataclass(frozen=True, slots=True, eq=False)
class DenseMatrix:
  """
  Square matrix of finite reals. The entries are copied and made read-only on construction.
  """

  entries: np.ndarray

  def __post_init__(self) -> None:
    arr = np.array(self.entries, dtype=float, copy=True)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
      raise exceptions.NotSquare(f"Expected a square matrix, got shape {arr.shape}")
    if arr.shape[0] < 1:
      raise exceptions.NotSquare("Matrix must have at least one row")
    if not np.all(np.isfinite(arr)):
      row, col = np.argwhere(~np.isfinite(arr))[0]
      raise exceptions.NonFiniteEntry(f"Entry ({row}, {col}) is not finite: {arr[row, col]}")
    arr.setflags(write=False)
    object.__setattr__(self, "entries", arr)

  @property
  def dim(self) -> int:
    return self.entries.shape[0]

  def __array__(self, dtype=None, copy=None) -> np.ndarray:
    return self.entries if dtype is None else self.entries.astype(dtype)


@dataclass(frozen=True, slots=True, eq=False)
class CertifiedMatrix:
  """
  Common base of the validated chain matrices. Only build these through the validators.
  """

  inner: DenseMatrix
  tolerance: float

  @property
  def entries(self) -> np.ndarray:
    return self.inner.entries

  @property
  def dim(self) -> int:
    return self.inner.dim


@dataclass(frozen=True, slots=True, eq=False)
class StochasticMatrix(CertifiedMatrix):
  """Irreducible row-stochastic matrix, rows renormalized to sum to 1."""

  @property
  def irreducible(self) -> bool:
    return True


@dataclass(frozen=True, slots=True, eq=False)
class SubstochasticMatrix(CertifiedMatrix):
  """Nonnegative matrix with row sums at most 1, with an irreducibility certificate."""

  irreducible: bool = False

  @property
  def row_slack(self) -> np.ndarray:
    """Missing mass per row, the probability of moving to the absorbing state."""
    return np.clip(1.0 - self.entries.sum(axis=1), 0.0, None)


@dataclass(frozen=True, slots=True, eq=False)
class PrincipalSubmatrixView:
  """
  The operator S_j: `parent` with row and column `removed` deleted.
  """

  parent: DenseMatrix
  removed: int

  def __post_init__(self) -> None:
    check_state(self.removed, self.parent.dim)

  @property
  def keep(self) -> np.ndarray:
    """Indices of the parent states kept by the view, in order."""
    return np.delete(np.arange(self.parent.dim), self.removed)

  @property
  def matrix(self) -> np.ndarray:
    keep = self.keep
    return self.parent.entries[np.ix_(keep, keep)]

  @property
  def removed_column(self) -> np.ndarray:
    """Column `removed` of the parent restricted to the kept rows."""
    return self.parent.entries[self.keep, self.removed]

  def position(self, state: int) -> int:
    """Maps a parent state to its row in the view."""
    check_state(state, self.parent.dim)
    if state == self.removed:
      raise exceptions.SameIndex(f"State {state} is removed from this view")
    return state if state < self.removed else state - 1

  def embed(self, values: np.ndarray, fill: float = 0.0) -> np.ndarray:
    """Expands a vector over the kept states to the full state space."""
    out = np.full(self.parent.dim, fill, dtype=float)
    out[self.keep] = values
    return out


# --------------------------------------------------
# Helpers
# --------------------------------------------------


def as_array(M) -> np.ndarray:
  """Returns the raw entries of any matrix-like argument."""
  if isinstance(M, CertifiedMatrix):
    return M.entries
  if isinstance(M, DenseMatrix):
    return M.entries
  return DenseMatrix(np.asarray(M, dtype=float)).entries


def check_state(state: int, dim: int) -> None:
  if not 0 <= int(state) < dim:
    raise exceptions.StateOutOfRange(f"State {state} is outside 0..{dim - 1}")


def check_pair(i: int, j: int, dim: int) -> None:
  check_state(i, dim)
  check_state(j, dim)
  if i == j:
    raise exceptions.SameIndex(f"States must differ, got i = j = {i}")


def as_substochastic(M) -> SubstochasticMatrix:
  """Views a certified stochastic matrix as a substochastic one with no absorption."""
  if isinstance(M, SubstochasticMatrix):
    return M
  if isinstance(M, StochasticMatrix):
    return SubstochasticMatrix(inner=M.inner, tolerance=M.tolerance, irreducible=True)
  return validate_substochastic(M)


# --------------------------------------------------
# Validation
# --------------------------------------------------


def strongly_connected_components(M) -> list[list[int]]:
  """
  Strongly connected components of the digraph with an edge (i, j) whenever M_ij > 0 and i != j.

  :return: components as sorted lists, ordered by their smallest state
  """
  arr = as_array(M)
  graph = nx.DiGraph()
  graph.add_nodes_from(range(arr.shape[0]))
  rows, cols = np.nonzero(arr > 0)
  graph.add_edges_from((int(r), int(c)) for r, c in zip(rows, cols) if r != c)
  return sorted((sorted(c) for c in nx.strongly_connected_components(graph)), key=lambda c: c[0])


def is_irreducible(M) -> bool:
  return len(strongly_connected_components(M)) == 1


def reducible_error(M, message: str) -> exceptions.Reducible:
  """A `Reducible` error that names the strongly connected components of M."""
  components = strongly_connected_components(M)
  return exceptions.Reducible(f"{message}, strongly connected components: {components}", components)


def _check_nonnegative(arr: np.ndarray) -> None:
  if np.any(arr < 0):
    row, col = np.argwhere(arr < 0)[0]
    raise exceptions.NegativeEntry(f"Entry ({row}, {col}) is negative: {arr[row, col]}")


def validate_stochastic(M, tol: float = DEFAULT_ROW_SUM_TOL) -> StochasticMatrix:
  """
  Certifies an irreducible stochastic matrix.

  Rows whose sums lie within `tol` of 1 are divided by their sums.

  :param M: square matrix of finite reals
  :param tol: allowed row-sum slack
  :return: the certified matrix
  :rtype: StochasticMatrix
  """
  arr = np.array(as_array(M), dtype=float)
  _check_nonnegative(arr)

  sums = arr.sum(axis=1)
  off = np.flatnonzero(np.abs(sums - 1.0) > tol)
  if off.size:
    raise exceptions.RowSumOutOfTolerance(f"Row {off[0]} sums to {sums[off[0]]!r}, tolerance {tol}")
  arr /= sums[:, None]

  if not is_irreducible(arr):
    raise reducible_error(arr, "Matrix is reducible")

  return StochasticMatrix(inner=DenseMatrix(arr), tolerance=tol)


def validate_substochastic(M, tol: float = DEFAULT_ROW_SUM_TOL) -> SubstochasticMatrix:
  """
  Certifies a substochastic matrix and records whether it is irreducible.

  Rows summing to slightly more than 1 (within `tol`) are scaled back to exactly 1.
  """
  arr = np.array(as_array(M), dtype=float)
  _check_nonnegative(arr)

  sums = arr.sum(axis=1)
  over = np.flatnonzero(sums > 1.0 + tol)
  if over.size:
    raise exceptions.RowSumExceedsOne(f"Row {over[0]} sums to {sums[over[0]]!r}, tolerance {tol}")
  high = sums > 1.0
  arr[high] /= sums[high, None]

  irreducible = is_irreducible(arr)
  if not irreducible:
    logging.debug("Substochastic matrix is reducible")

  return SubstochasticMatrix(inner=DenseMatrix(arr), tolerance=tol, irreducible=irreducible)


# --------------------------------------------------
# Linear Algebra
# --------------------------------------------------


@dataclass(frozen=True, slots=True, eq=False)
class LinearSolve:
  """Solution of A x = b along with the residual ‖Ax − b‖_∞."""

  x: np.ndarray
  residual: float


@dataclass(frozen=True, slots=True, eq=False)
class Inverse:
  """An inverse along with the residual ‖A A⁻¹ − I‖_∞."""

  matrix: np.ndarray
  residual: float


def _factor(A: np.ndarray, threshold: float) -> tuple[np.ndarray, np.ndarray]:
  with warnings.catch_warnings():
    warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
    lu, piv = scipy.linalg.lu_factor(A, check_finite=False)

  smallest = np.min(np.abs(np.diag(lu)))
  limit = threshold * np.max(np.abs(A))
  if smallest <= limit:
    raise exceptions.SingularMatrix(f"Pivot {smallest:.3e} is below {limit:.3e}")
  return lu, piv


def solve_linear(A, b, threshold: float = PIVOT_RELATIVE_THRESHOLD) -> LinearSolve:
  """
  Solves A x = b by LU with partial pivoting.

  :param A: square nonsingular matrix
  :param b: right-hand side vector (or matrix of columns)
  :param threshold: relative pivot threshold for the singularity check
  :return: solution and residual
  :rtype: LinearSolve
  """
  arr = as_array(A)
  rhs = np.asarray(b, dtype=float)
  lu_piv = _factor(arr, threshold)
  x = scipy.linalg.lu_solve(lu_piv, rhs, check_finite=False)
  residual = float(np.max(np.abs(arr @ x - rhs), initial=0.0))
  logging.debug(f"Linear solve of size {arr.shape[0]}, residual {residual:.3e}")
  return LinearSolve(x=x, residual=residual)


def invert(A, threshold: float = PIVOT_RELATIVE_THRESHOLD) -> Inverse:
  """Inverts A by LU with partial pivoting."""
  arr = as_array(A)
  identity = np.eye(arr.shape[0])
  lu_piv = _factor(arr, threshold)
  inv = scipy.linalg.lu_solve(lu_piv, identity, check_finite=False)
  residual = float(np.linalg.norm(arr @ inv - identity, ord=np.inf))
  logging.debug(f"Inverse of size {arr.shape[0]}, residual {residual:.3e}")
  return Inverse(matrix=inv, residual=residual)


def lu_determinant(A) -> float:
  """Determinant from the LU factors. The empty matrix has determinant 1."""
  arr = np.asarray(A, dtype=float)
  if arr.size == 0:
    return 1.0

  with warnings.catch_warnings():
    warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
    lu, piv = scipy.linalg.lu_factor(arr, check_finite=False)

  swaps = np.count_nonzero(piv != np.arange(piv.size))
  return float((-1.0) ** swaps * np.prod(np.diag(lu)))


def condition_number_inf(A) -> float:
  """‖A‖_∞ ‖A⁻¹‖_∞"""
  arr = as_array(A)
  return float(np.linalg.norm(arr, ord=np.inf) * np.linalg.norm(invert(arr).matrix, ord=np.inf))


# --------------------------------------------------
# Generators
# --------------------------------------------------


def ring_walk(L: int, laziness: float = 1 / 3) -> StochasticMatrix:
  """
  Lazy symmetric random walk on the ring Z/LZ, holding with probability `laziness`.

  For L = 2 both neighbours coincide, for L = 1 the walk is the 1×1 identity.
  """
  if L < 1:
    raise ValueError(f"Ring length must be positive, got {L}")
  if not 0 <= laziness < 1:
    raise ValueError(f"Laziness must be in [0, 1), got {laziness}")

  P = np.zeros((L, L))
  step = (1.0 - laziness) / 2
  for k in range(L):
    P[k, (k + 1) % L] += step
    P[k, (k - 1) % L] += step
    P[k, k] += laziness
  return validate_stochastic(P)


def _random_cycle_weights(L: int, rng: np.random.Generator, density: float) -> np.ndarray:
  W = rng.random((L, L)) * (rng.random((L, L)) < density)
  order = rng.permutation(L)
  W[order, np.roll(order, -1)] = rng.uniform(0.1, 1.0, size=L)
  return W


def random_irreducible_stochastic(
  L: int, rng: np.random.Generator, density: float = 0.5, min_diagonal: float = 0.0
) -> StochasticMatrix:
  """
  Random irreducible stochastic matrix. A random Hamiltonian cycle is always included.

  :param min_diagonal: mixes in this much of the identity, keeping every F_ii above it
  """
  if L == 1:
    return validate_stochastic(np.ones((1, 1)))

  W = _random_cycle_weights(L, rng, density)
  F = W / W.sum(axis=1, keepdims=True)
  if min_diagonal:
    F = (1.0 - min_diagonal) * F + min_diagonal * np.eye(L)
  return validate_stochastic(F)


def random_irreducible_substochastic(
  L: int, rng: np.random.Generator, density: float = 0.5, scale: tuple[float, float] = (0.5, 0.99)
) -> SubstochasticMatrix:
  """Random irreducible substochastic matrix whose row sums are drawn uniformly from `scale`."""
  F = random_irreducible_stochastic(L, rng, density).entries
  S = F * rng.uniform(*scale, size=(L, 1))
  return validate_substochastic(S)
