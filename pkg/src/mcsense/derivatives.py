"""
mcsense Derivatives

Exact derivatives of π along the direction e_i e_jᵀ - e_i e_iᵀ, which moves probability mass from
F_ii to F_ij and keeps F stochastic.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from typing import Final

import numpy as np

from .matrix_core import StochasticMatrix, check_pair, check_state, validate_stochastic
from .sensitivities import q_single
from .stationary import InvariantDistribution, OccupationMatrix, occupation_matrix, stationary_distribution

#: Default step of the finite difference check
DEFAULT_FD_STEP: Final[float] = 1e-6


@dataclass(frozen=True, slots=True, eq=False)
class DerivativeSlice:
  """
  d π_m / d F_ij and d log π_m / d F_ij for all m, with the extremes of the log derivative.

  The minimum -π_i E_j[τ_i] is attained at m = i and the maximum 1/P_i[τ_j < τ_i] - π_i E_j[τ_i]
  at m = j.
  """

  i: int
  j: int
  dpi: np.ndarray
  dlogpi: np.ndarray
  min_value: float
  argmin: int
  max_value: float
  argmax: int
  hit_probability: float

  @property
  def spread(self) -> float:
    return self.max_value - self.min_value


class DerivativeEvaluator:
  """
  Evaluates derivative slices of one chain, caching π and the occupation matrix of each target.

  The cache is shared between threads.
  """

  def __init__(self, F: StochasticMatrix, pi: InvariantDistribution | None = None) -> None:
    self.F = F
    self.pi = (pi or stationary_distribution(F)).pi
    self._occupations: dict[int, OccupationMatrix] = {}
    self._lock = threading.Lock()

  def occupation(self, i: int) -> np.ndarray:
    with self._lock:
      if i not in self._occupations:
        self._occupations[i] = occupation_matrix(self.F, i)
      return self._occupations[i].full()

  def slice(self, i: int, j: int) -> DerivativeSlice:
    check_pair(i, j, self.F.dim)

    N = self.occupation(i)
    expected_hit = N[j].sum()
    pi_i = self.pi[i]

    dpi = pi_i * (N[j] - self.pi * expected_hit)
    dlogpi = dpi / self.pi
    p = q_single(self.F, i, j)

    return DerivativeSlice(
      i=i,
      j=j,
      dpi=dpi,
      dlogpi=dlogpi,
      min_value=-pi_i * expected_hit,
      argmin=i,
      max_value=1.0 / p - pi_i * expected_hit,
      argmax=j,
      hit_probability=p,
    )

  def matrix(self, m: int) -> np.ndarray:
    """Gradient of log π_m: entry (i, j) is d log π_m / d F_ij, NaN on the diagonal."""
    check_state(m, self.F.dim)
    L = self.F.dim
    G = np.full((L, L), np.nan)

    for i in range(L):
      N = self.occupation(i)
      expected_hit = N.sum(axis=1)
      others = np.arange(L) != i
      G[i, others] = self.pi[i] * (N[others, m] / self.pi[m] - expected_hit[others])
    return G


def derivative_slice(F: StochasticMatrix, i: int, j: int) -> DerivativeSlice:
  """
  :param F: irreducible stochastic matrix
  :param i: row of the perturbed entries
  :param j: column receiving the mass taken from F_ii
  :return: the derivative of π in the direction e_i e_jᵀ - e_i e_iᵀ
  :rtype: DerivativeSlice
  """
  return DerivativeEvaluator(F).slice(i, j)


def derivative_matrix(F: StochasticMatrix, m: int) -> np.ndarray:
  return DerivativeEvaluator(F).matrix(m)


def logderiv_bounds(F: StochasticMatrix, i: int, j: int) -> tuple[float, float]:
  """
  Bracket of max_m |d log π_m / d F_ij|: ½ and 1 times P_i[τ_j < τ_i]⁻¹.
  """
  p = q_single(F, i, j)
  return 0.5 / p, 1.0 / p


def finite_difference_slice(F: StochasticMatrix, i: int, j: int, eps: float = DEFAULT_FD_STEP) -> np.ndarray:
  """
  Central finite difference of π along e_i e_jᵀ - e_i e_iᵀ.

  The step shrinks to half of F_ii and F_ij so both perturbed matrices keep the sparsity pattern.
  When one of the entries is zero a one-sided difference is taken instead.
  """
  check_pair(i, j, F.dim)
  arr = F.entries
  direction = np.zeros_like(arr)
  direction[i, j] = 1.0
  direction[i, i] = -1.0

  def perturbed(step: float) -> np.ndarray:
    return stationary_distribution(validate_stochastic(arr + step * direction, tol=1e-9)).pi

  forward_room, backward_room = arr[i, i], arr[i, j]
  if forward_room > 0 and backward_room > 0:
    h = min(eps, forward_room / 2, backward_room / 2)
    return (perturbed(h) - perturbed(-h)) / (2 * h)

  base = stationary_distribution(F).pi
  if forward_room > 0:
    h = min(eps, forward_room / 2)
    logging.debug(f"Forward difference at ({i}, {j}) with step {h:.3e}")
    return (perturbed(h) - base) / h
  if backward_room > 0:
    h = min(eps, backward_room / 2)
    logging.debug(f"Backward difference at ({i}, {j}) with step {h:.3e}")
    return (base - perturbed(-h)) / h
  raise ValueError(f"F[{i}, {i}] and F[{i}, {j}] are both zero, no feasible direction")
