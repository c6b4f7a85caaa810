"""
mcsense Sensitivities

Q_ij(S) is the probability that the chain of S, started at i, hits j before returning to i or
being absorbed in the state that collects the missing row mass of S. Its reciprocal measures how
much π can move when F_ij is perturbed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Final, Iterator

import numpy as np

from . import exceptions
from .matrix_core import (
  PIVOT_RELATIVE_THRESHOLD,
  PrincipalSubmatrixView,
  SubstochasticMatrix,
  as_substochastic,
  check_pair,
  invert,
  solve_linear,
  reducible_error,
)

#: Entries of a hitting vector within this distance of [0, 1] are clamped
PROBABILITY_SLACK: Final[float] = 1e-12

#: A capacitance determinant below this fraction of its scale falls back to the direct solve
CAPACITANCE_RELATIVE_THRESHOLD: Final[float] = 1e-12

#: Slack for comparing two sensitivity matrices
MONOTONICITY_SLACK: Final[float] = 1e-12


class SensitivitySource(Enum):
  ORACLE = "oracle"
  FAST = "fast"


# --------------------------------------------------
# Types
# --------------------------------------------------


@dataclass(frozen=True, slots=True, eq=False)
class HittingVector:
  """
  q_k = P_k[τ_j < min(τ_i, τ_ω)] for every state k != j.
  """

  i: int
  j: int
  states: np.ndarray
  q: np.ndarray
  clamped: int = 0

  def __getitem__(self, k: int) -> float:
    if k == self.j:
      raise exceptions.SameIndex(f"The hitting vector excludes the target state {k}")
    return float(self.q[k if k < self.j else k - 1])


@dataclass(frozen=True, slots=True, eq=False)
class SensitivityMatrix:
  """
  Q[i, j] = Q_ij(S) for i != j. The diagonal is unset (NaN).
  """

  Q: np.ndarray
  source: SensitivitySource
  base: SubstochasticMatrix
  fallback_columns: tuple[int, ...] = ()
  clamped: int = 0
  condition: float | None = None

  @property
  def dim(self) -> int:
    return self.Q.shape[0]

  def __getitem__(self, index: tuple[int, int]) -> float:
    i, j = index
    check_pair(i, j, self.dim)
    return float(self.Q[i, j])

  def inverse(self) -> np.ndarray:
    """The sensitivities Q_ij⁻¹, NaN on the diagonal."""
    with np.errstate(divide="ignore"):
      return 1.0 / self.Q

  def neg_log(self) -> np.ndarray:
    with np.errstate(divide="ignore"):
      return -np.log(self.Q)

  def off_diagonal(self) -> Iterator[tuple[int, int, float]]:
    for i in range(self.dim):
      for j in range(self.dim):
        if i != j:
          yield i, j, float(self.Q[i, j])


@dataclass(frozen=True, slots=True, eq=False)
class AlgorithmWorkspace:
  """
  Shared state of the fast algorithm. With the reference column pinned to state 0:
  A(0) = I - S + e_0 e_0ᵀ S, `ainv` is its inverse and `sainv` is S A(0)⁻¹.
  """

  ainv: np.ndarray
  sainv: np.ndarray
  residual: float
  condition: float
  A: np.ndarray = field(repr=False)

  def capacitance(self, j: int) -> np.ndarray:
    """The 2×2 matrix C(j) = I + V A(0)⁻¹ U of the rank-two update from A(0) to A(j)."""
    sa = self.sainv
    return np.eye(2) + np.array([[sa[j, j], -sa[j, 0]], [sa[0, j], -sa[0, 0]]])


# --------------------------------------------------
# Direct Solve
# --------------------------------------------------


def _require_irreducible(S: SubstochasticMatrix) -> None:
  if not S.irreducible:
    raise reducible_error(S.entries, "Sensitivities are undefined for a reducible matrix")


def _certify(q: np.ndarray, slack: float) -> tuple[np.ndarray, int]:
  bad = (q < -slack) | (q > 1.0 + slack)
  if np.any(bad):
    raise exceptions.ProbabilityOutOfRange(f"Hitting probability {q[bad][0]!r} is outside [0, 1]")

  clamped = int(np.count_nonzero((q < 0.0) | (q > 1.0)))
  if clamped:
    logging.warning(f"Clamped {clamped} hitting probabilities with round-off outside [0, 1]")
  return np.clip(q, 0.0, 1.0), clamped


def q_vector(S, i: int, j: int, slack: float = PROBABILITY_SLACK, pivot: float = PIVOT_RELATIVE_THRESHOLD) -> HittingVector:
  """
  Solves (I - S_j + S_j e_i e_iᵀ) q = S_{j⊥,j} on the states other than j.

  :param S: irreducible substochastic (or stochastic) matrix
  :param i: state the excursion returns to
  :param j: target state
  :param slack: certification slack on [0, 1]
  :param pivot: relative pivot threshold of the solve
  :return: hitting probabilities from every state k != j
  :rtype: HittingVector
  """
  S = as_substochastic(S)
  check_pair(i, j, S.dim)
  _require_irreducible(S)

  view = PrincipalSubmatrixView(S.inner, j)
  Sj = view.matrix
  ii = view.position(i)

  # column i of I - S_j + S_j e_i e_iᵀ is e_i
  A = np.eye(S.dim - 1) - Sj
  A[:, ii] = 0.0
  A[ii, ii] = 1.0

  solution = solve_linear(A, view.removed_column, pivot)
  q, clamped = _certify(solution.x, slack)
  return HittingVector(i=i, j=j, states=view.keep, q=q, clamped=clamped)


def q_single(S, i: int, j: int, slack: float = PROBABILITY_SLACK, pivot: float = PIVOT_RELATIVE_THRESHOLD) -> float:
  """Q_ij(S) by one direct solve."""
  return q_vector(S, i, j, slack, pivot)[i]


def q_all_oracle(S, slack: float = PROBABILITY_SLACK, pivot: float = PIVOT_RELATIVE_THRESHOLD) -> SensitivityMatrix:
  """Every Q_ij(S) by a separate direct solve. Slow, used to cross-check the fast algorithm."""
  S = as_substochastic(S)
  _require_irreducible(S)

  L = S.dim
  Q = np.full((L, L), np.nan)
  clamped = 0
  for j in range(L):
    for i in range(L):
      if i == j:
        continue
      hv = q_vector(S, i, j, slack, pivot)
      Q[i, j] = hv[i]
      clamped += hv.clamped
  return SensitivityMatrix(Q=Q, source=SensitivitySource.ORACLE, base=S, clamped=clamped)


# --------------------------------------------------
# Fast Algorithm
# --------------------------------------------------


def build_workspace(S, pivot: float = PIVOT_RELATIVE_THRESHOLD) -> AlgorithmWorkspace:
  """Inverts A(0) and forms S A(0)⁻¹ in O(L²) from the inverse."""
  S = as_substochastic(S)
  arr = S.entries
  L = S.dim

  A = np.eye(L) - arr
  A[0, :] = 0.0
  A[0, 0] = 1.0

  inverse = invert(A, pivot)
  ainv = inverse.matrix

  # rows k != 0 of A(0) are e_kᵀ - S_k, so (S A⁻¹)_k = A⁻¹_k - e_kᵀ
  sainv = ainv - np.eye(L)
  sainv[0, :] = arr[0, :] @ ainv

  condition = float(np.linalg.norm(A, ord=np.inf) * np.linalg.norm(ainv, ord=np.inf))
  logging.debug(f"Workspace of size {L}: residual {inverse.residual:.3e}, condition {condition:.3e}")
  return AlgorithmWorkspace(ainv=ainv, sainv=sainv, residual=inverse.residual, condition=condition, A=A)


def q_all_fast(
  S,
  threshold: float = CAPACITANCE_RELATIVE_THRESHOLD,
  slack: float = PROBABILITY_SLACK,
  pivot: float = PIVOT_RELATIVE_THRESHOLD,
) -> SensitivityMatrix:
  """
  All sensitivities Q_ij(S) from one L×L inversion plus O(L²) work per target column.

  A(j) = I - S + e_j e_jᵀ S differs from A(0) by the rank-two term U V with U = [e_j, -e_0] and
  V = [e_jᵀ S; e_0ᵀ S], and Q_ij = A(j)⁻¹_ij / A(j)⁻¹_ii. Columns whose capacitance matrix is
  numerically singular are computed by direct solves and listed in `fallback_columns`.

  :param S: irreducible substochastic (or stochastic) matrix
  :param threshold: relative determinant threshold of the capacitance matrices
  :param slack: certification slack on [0, 1]
  :param pivot: relative pivot threshold of the inversion and of the fallback solves
  :return: sensitivity matrix with an unset diagonal
  :rtype: SensitivityMatrix
  """
  S = as_substochastic(S)
  _require_irreducible(S)

  L = S.dim
  Q = np.full((L, L), np.nan)
  if L == 1:
    return SensitivityMatrix(Q=Q, source=SensitivitySource.FAST, base=S)

  ws = build_workspace(S, pivot)
  ainv, sainv = ws.ainv, ws.sainv
  diag = np.diag(ainv)
  others = np.arange(L)

  Q[1:, 0] = ainv[1:, 0] / diag[1:]

  fallback: list[int] = []
  clamped = 0
  for j in range(1, L):
    C = ws.capacitance(j)
    det = C[0, 0] * C[1, 1] - C[0, 1] * C[1, 0]
    scale = max(1.0, float(np.max(np.abs(C)))) ** 2

    if abs(det) < threshold * scale:
      logging.warning(f"Capacitance matrix of column {j} is singular (det {det:.3e}), using direct solves")
      fallback.append(j)
      for i in others[others != j]:
        hv = q_vector(S, int(i), j, slack, pivot)
        Q[i, j] = hv[int(i)]
        clamped += hv.clamped
      continue

    Cinv = np.array([[C[1, 1], -C[0, 1]], [-C[1, 0], C[0, 0]]]) / det
    a = ainv[:, j]
    b = -ainv[:, 0]

    # column j of A(j)⁻¹
    x, y = sainv[j, j], sainv[0, j]
    column = a - (a * (Cinv[0, 0] * x + Cinv[0, 1] * y) + b * (Cinv[1, 0] * x + Cinv[1, 1] * y))

    # diagonal of A(j)⁻¹
    xs, ys = sainv[j, :], sainv[0, :]
    diagonal = diag - (a * (Cinv[0, 0] * xs + Cinv[0, 1] * ys) + b * (Cinv[1, 0] * xs + Cinv[1, 1] * ys))

    mask = others != j
    q, count = _certify(column[mask] / diagonal[mask], slack)
    Q[mask, j] = q
    clamped += count

  return SensitivityMatrix(
    Q=Q,
    source=SensitivitySource.FAST,
    base=S,
    fallback_columns=tuple(fallback),
    clamped=clamped,
    condition=ws.condition,
  )


def compute_sensitivities(
  S,
  source: SensitivitySource = SensitivitySource.FAST,
  threshold: float = CAPACITANCE_RELATIVE_THRESHOLD,
  slack: float = PROBABILITY_SLACK,
  pivot: float = PIVOT_RELATIVE_THRESHOLD,
) -> SensitivityMatrix:
  if source is SensitivitySource.ORACLE:
    return q_all_oracle(S, slack, pivot)
  return q_all_fast(S, threshold, slack, pivot)


# --------------------------------------------------
# Monotonicity
# --------------------------------------------------


def monotonicity_check(S_small, S_big, slack: float = MONOTONICITY_SLACK) -> bool:
  """
  Whether Q(S_big) >= Q(S_small) off the diagonal, for S_small <= S_big entrywise.
  """
  small, big = as_substochastic(S_small), as_substochastic(S_big)
  if small.dim != big.dim:
    raise exceptions.NotDominated(f"Dimensions differ: {small.dim} and {big.dim}")
  if np.any(small.entries > big.entries):
    row, col = np.argwhere(small.entries > big.entries)[0]
    raise exceptions.NotDominated(f"Entry ({row}, {col}) of the smaller matrix exceeds the larger one")
  _require_irreducible(small)

  q_small = q_all_fast(small).Q
  q_big = q_all_fast(big).Q
  off = ~np.eye(small.dim, dtype=bool)
  return bool(np.all(q_big[off] >= q_small[off] - slack))
