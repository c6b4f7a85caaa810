"""
mcsense Stationary

Invariant distributions, occupation times and mean first passage times of irreducible chains.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import exceptions
from .matrix_core import (
  PrincipalSubmatrixView,
  StochasticMatrix,
  check_state,
  invert,
  lu_determinant,
  solve_linear,
)
from .sensitivities import q_vector


# --------------------------------------------------
# Types
# --------------------------------------------------


@dataclass(frozen=True, slots=True, eq=False)
class InvariantDistribution:
  """π with πᵀF = πᵀ, and the residual ‖πᵀF - πᵀ‖_∞ it was computed with."""

  pi: np.ndarray
  residual: float

  @property
  def dim(self) -> int:
    return self.pi.size

  def __getitem__(self, k: int) -> float:
    return float(self.pi[k])


@dataclass(frozen=True, slots=True, eq=False)
class OccupationMatrix:
  """
  N = (I - F_i)⁻¹ on the states other than `target`: N[j][m] is the expected number of visits to m
  before hitting the target, starting from j.
  """

  target: int
  states: np.ndarray
  N: np.ndarray

  def full(self) -> np.ndarray:
    """N embedded in the full state space, with zero row and column at the target."""
    L = self.N.shape[0] + 1
    out = np.zeros((L, L))
    out[np.ix_(self.states, self.states)] = self.N
    return out

  @property
  def expected_hit(self) -> np.ndarray:
    """E_j[τ_target] for every state j, zero at the target."""
    return self.full().sum(axis=1)


@dataclass(frozen=True, slots=True, eq=False)
class PassageStats:
  """
  First passage statistics towards `target` = i.

  `expected_hit[j]` is E_j[τ_i], with E_i[τ_i] = 1/π_i at j = i.
  `hit_before_return[j]` is P_i[τ_j < τ_i], undefined (NaN) at j = i.
  """

  target: int
  expected_hit: np.ndarray
  hit_before_return: np.ndarray


# --------------------------------------------------
# Invariant Distribution
# --------------------------------------------------


def _residual(F: np.ndarray, pi: np.ndarray) -> float:
  return float(np.max(np.abs(pi @ F - pi)))


def stationary_distribution(F: StochasticMatrix) -> InvariantDistribution:
  """
  Solves (I - Fᵀ) π = 0 with the last equation replaced by ∑ π = 1.

  :param F: irreducible stochastic matrix
  :return: the invariant distribution
  :rtype: InvariantDistribution
  """
  arr = F.entries
  L = F.dim

  A = np.eye(L) - arr.T
  A[-1, :] = 1.0
  b = np.zeros(L)
  b[-1] = 1.0

  pi = solve_linear(A, b).x
  if np.any(pi <= 0):
    logging.warning(f"Invariant distribution has nonpositive entries, min {pi.min():.3e}")

  residual = _residual(arr, pi)
  logging.debug(f"Invariant distribution of size {L}, residual {residual:.3e}")
  return InvariantDistribution(pi=pi, residual=residual)


def stationary_via_minors(F: StochasticMatrix) -> InvariantDistribution:
  """π_i proportional to det(I - F_i), the Markov chain tree formula."""
  arr = F.entries
  L = F.dim

  minors = np.array([lu_determinant(np.eye(L - 1) - PrincipalSubmatrixView(F.inner, i).matrix) for i in range(L)])
  if np.any(minors <= 0):
    raise exceptions.SingularMatrix(f"Principal minor det(I - F_i) is not positive: {minors.min():.3e}")

  pi = minors / minors.sum()
  return InvariantDistribution(pi=pi, residual=_residual(arr, pi))


# --------------------------------------------------
# Occupation and Passage Times
# --------------------------------------------------


def occupation_matrix(F: StochasticMatrix, i: int) -> OccupationMatrix:
  check_state(i, F.dim)
  view = PrincipalSubmatrixView(F.inner, i)
  if F.dim == 1:
    return OccupationMatrix(target=i, states=view.keep, N=np.zeros((0, 0)))

  N = invert(np.eye(F.dim - 1) - view.matrix).matrix
  return OccupationMatrix(target=i, states=view.keep, N=N)


def passage_stats(F: StochasticMatrix, i: int) -> PassageStats:
  """
  Expected hitting times of i and the probabilities P_i[τ_j < τ_i].

  :param F: irreducible stochastic matrix
  :param i: target state
  :return: the passage statistics towards i
  :rtype: PassageStats
  """
  occupation = occupation_matrix(F, i)
  expected = occupation.expected_hit

  # first step analysis for the return time
  row = F.entries[i].copy()
  row[i] = 0.0
  expected[i] = 1.0 + row @ expected

  hits = np.full(F.dim, np.nan)
  for j in range(F.dim):
    if j != i:
      hits[j] = q_vector(F, i, j)[i]

  return PassageStats(target=i, expected_hit=expected, hit_before_return=hits)


def mean_first_passage_matrix(F: StochasticMatrix) -> np.ndarray:
  """
  M[j, m] = E_j[τ_m]. The diagonal holds the mean return times E_m[τ_m] = 1/π_m.
  """
  arr = F.entries
  L = F.dim
  M = np.zeros((L, L))
  if L == 1:
    M[0, 0] = 1.0
    return M

  ones = np.ones(L - 1)

  for m in range(L):
    view = PrincipalSubmatrixView(F.inner, m)
    hit = view.embed(solve_linear(np.eye(L - 1) - view.matrix, ones).x)
    row = arr[m].copy()
    row[m] = 0.0
    hit[m] = 1.0 + row @ hit
    M[:, m] = hit
  return M


def return_occupation(F: StochasticMatrix, i: int) -> np.ndarray:
  """
  Expected visits to each state k during an excursion from i, E_i[∑_{s<τ_i} 1_k(X_s)].

  Equals π_k/π_i.
  """
  N = occupation_matrix(F, i).full()
  row = F.entries[i].copy()
  row[i] = 0.0
  visits = row @ N
  visits[i] = 1.0
  return visits
