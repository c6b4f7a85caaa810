"""
mcsense Bounds

Relative error bounds on π for a perturbation F -> F̃, the witnesses showing they are sharp, and the
classical condition-number bounds they are compared with.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Final

import numpy as np

from . import exceptions
from .matrix_core import (
  StochasticMatrix,
  SubstochasticMatrix,
  check_pair,
  reducible_error,
  validate_stochastic,
  validate_substochastic,
)
from .sensitivities import SensitivityMatrix, SensitivitySource, compute_sensitivities
from .stationary import mean_first_passage_matrix, occupation_matrix, stationary_distribution

#: Round-off allowed when checking F >= S
DOMINATION_SLACK: Final[float] = 1e-14

#: A row with less missing mass than this has no room for a witness
SLACK_FLOOR: Final[float] = 1e-15


# --------------------------------------------------
# Types
# --------------------------------------------------


@dataclass(frozen=True, slots=True, eq=False)
class ChoMeyerCoefficients:
  """
  β_ij = max_m |(1 - δ_im) E_i[τ_m] - (1 - δ_jm) E_j[τ_m]| with the mean first passage matrix it
  was built from.
  """

  beta: np.ndarray
  passage: np.ndarray

  def bound(self, F: StochasticMatrix, Ftilde: StochasticMatrix) -> float:
    delta = np.abs(Ftilde.entries - F.entries)
    np.fill_diagonal(delta, 0.0)
    return float(np.nansum(self.beta * delta))


@dataclass(frozen=True, slots=True, eq=False)
class BoundReport:
  """
  Bounds on max_m |log π_m(F̃) - log π_m(F)|, all on the log scale.

  `ocinneide` is None when F and F̃ have different off-diagonal sparsity patterns.
  """

  true_error: float
  log_form: float
  linear_form: float
  ipsen_meyer: float
  kappas: np.ndarray
  ocinneide: float | None
  cho_meyer: float
  sensitivity_source: SensitivitySource
  fallback_columns: tuple[int, ...] = ()
  lower_envelope: SubstochasticMatrix | None = field(default=None, repr=False)

  def rows(self) -> list[tuple[str, float | None]]:
    return [
      ("true_error", self.true_error),
      ("log_form", self.log_form),
      ("linear_form", self.linear_form),
      ("ipsen_meyer", self.ipsen_meyer),
      ("ocinneide", self.ocinneide),
      ("cho_meyer", self.cho_meyer),
    ]


@dataclass(frozen=True, slots=True)
class SparsifiedEntry:
  i: int
  j: int
  value: float
  sensitivity: float


@dataclass(frozen=True, slots=True, eq=False)
class SparsificationReport:
  """
  Entries of F below `threshold` moved to the diagonal, with the sensitivity of each dropped entry
  and the bounds for the sparsified chain.
  """

  threshold: float
  sparsified: StochasticMatrix
  dropped: list[SparsifiedEntry]
  report: BoundReport


# --------------------------------------------------
# Helpers
# --------------------------------------------------


def _off_diagonal(L: int) -> np.ndarray:
  return ~np.eye(L, dtype=bool)


def _check_dims(*matrices) -> int:
  dims = {M.dim for M in matrices}
  if len(dims) != 1:
    raise ValueError(f"Matrices have different dimensions: {sorted(dims)}")
  return dims.pop()


def to_log_scale(relative: float | np.ndarray) -> float | np.ndarray:
  """
  Moves a bound b on |x̃/x - 1| to a bound on |log x̃ - log x|: -log(1 - b), infinite when b >= 1.
  """
  relative = np.asarray(relative, dtype=float)
  with np.errstate(divide="ignore"):
    moved = np.where(relative < 1.0, -np.log1p(-np.minimum(relative, 1.0)), np.inf)
  return float(moved) if moved.ndim == 0 else moved


def _check_dominates(M, S: SubstochasticMatrix, name: str) -> None:
  below = M.entries < S.entries - DOMINATION_SLACK
  if np.any(below):
    row, col = np.argwhere(below)[0]
    raise exceptions.DominationViolated(f"{name}[{row}, {col}] = {M.entries[row, col]!r} is below S = {S.entries[row, col]!r}")


def lower_envelope(Ftilde: StochasticMatrix, alpha: float | np.ndarray) -> SubstochasticMatrix:
  """
  S_ij = max(F̃_ij - α_ij, 0), the largest matrix below every F within the error budget α of F̃.
  """
  alpha = np.broadcast_to(np.asarray(alpha, dtype=float), Ftilde.entries.shape)
  if np.any(alpha < 0):
    raise ValueError("Error budget must be nonnegative")

  S = validate_substochastic(np.maximum(Ftilde.entries - alpha, 0.0))
  if not S.irreducible:
    logging.warning("Lower envelope is reducible, no bound can be given")
  return S


def random_completion(S: SubstochasticMatrix, rng: np.random.Generator) -> StochasticMatrix:
  """A random stochastic F >= S, spreading the missing mass of each row with Dirichlet weights."""
  L = S.dim
  weights = rng.dirichlet(np.ones(L), size=L)
  F = S.entries + S.row_slack[:, None] * weights
  return validate_stochastic(F, tol=1e-10)


# --------------------------------------------------
# Errors and Bounds
# --------------------------------------------------


def true_relative_error(F: StochasticMatrix, Ftilde: StochasticMatrix) -> float:
  """max_m |log π_m(F̃) - log π_m(F)|"""
  _check_dims(F, Ftilde)
  pi = stationary_distribution(F).pi
  pi_tilde = stationary_distribution(Ftilde).pi
  return float(np.max(np.abs(np.log(pi_tilde) - np.log(pi))))


def bound_log_form(F: StochasticMatrix, Ftilde: StochasticMatrix, S: SubstochasticMatrix, Q: SensitivityMatrix) -> float:
  """
  ∑_{i≠j} |log(F̃_ij - S_ij + Q_ij(S)) - log(F_ij - S_ij + Q_ij(S))|

  :param F: stochastic matrix with F >= S
  :param Ftilde: stochastic matrix with F̃ >= S
  :param S: irreducible lower envelope
  :param Q: sensitivities of S
  :return: bound on the log-scale relative error of π
  :rtype: float
  """
  L = _check_dims(F, Ftilde, S, Q)
  if not S.irreducible:
    raise reducible_error(S.entries, "Lower envelope is reducible, no bound can be given")
  _check_dominates(F, S, "F")
  _check_dominates(Ftilde, S, "F̃")
  _check_dominates(F, Q.base, "F")
  _check_dominates(Ftilde, Q.base, "F̃")

  off = _off_diagonal(L)
  base = Q.Q[off] - S.entries[off]
  terms = np.abs(np.log(Ftilde.entries[off] + base) - np.log(F.entries[off] + base))
  return float(terms.sum())


def bound_linear_form(F: StochasticMatrix, Ftilde: StochasticMatrix, Q: SensitivityMatrix) -> float:
  """∑_{i≠j} Q_ij⁻¹ |F̃_ij - F_ij|"""
  L = _check_dims(F, Ftilde, Q)
  _check_dominates(F, Q.base, "F")
  _check_dominates(Ftilde, Q.base, "F̃")

  off = _off_diagonal(L)
  delta = np.abs(Ftilde.entries[off] - F.entries[off])
  return float(np.sum(delta / Q.Q[off]))


def sharpness_witness(S: SubstochasticMatrix, i: int, j: int, eta: float) -> tuple[StochasticMatrix, StochasticMatrix]:
  """
  Stochastic F >= S and F^η = F + η(e_i e_jᵀ - e_i e_iᵀ) whose π differ by at least half the bound.

  F sends the missing mass of every row to column i, so P_i[τ_j < τ_i](F) = Q_ij(S).

  :param S: irreducible substochastic matrix with missing mass in row i
  :param eta: step in (0, slack of row i)
  :return: the pair (F, F^η)
  """
  check_pair(i, j, S.dim)
  if not S.irreducible:
    raise reducible_error(S.entries, "Witness needs an irreducible S")

  slack = S.row_slack
  if slack[i] <= SLACK_FLOOR:
    raise exceptions.NoSlack(f"Row {i} of S has no missing mass")
  if not 0 < eta < slack[i]:
    raise exceptions.EtaTooLarge(f"Step {eta!r} must lie in (0, {slack[i]!r})")

  arr = S.entries.copy()
  arr[:, i] += slack
  F = validate_stochastic(arr)

  arr[i, j] += eta
  arr[i, i] -= eta
  Feta = validate_stochastic(arr)
  return F, Feta


# --------------------------------------------------
# Classical Bounds
# --------------------------------------------------


def ipsen_meyer_kappas(F: StochasticMatrix) -> np.ndarray:
  """κ_i = ‖(I - F_i)⁻¹‖_∞ = max_j E_j[τ_i]"""
  if F.dim == 1:
    return np.zeros(1)
  return np.array([np.linalg.norm(occupation_matrix(F, i).N, ord=np.inf) for i in range(F.dim)])


def ipsen_meyer_bound(F: StochasticMatrix, Ftilde: StochasticMatrix, kappas: np.ndarray | None = None) -> np.ndarray:
  """
  Per-state bound on |log π_i(F̃) - log π_i(F)|.

  The relative bound b_i = κ_i ‖(F̃ - F)(I - e_i e_iᵀ)‖_∞ is moved to the log scale as -log(1 - b_i),
  infinite when b_i >= 1.
  """
  L = _check_dims(F, Ftilde)
  kappas = ipsen_meyer_kappas(F) if kappas is None else kappas
  delta = np.abs(Ftilde.entries - F.entries)

  relative = np.empty(L)
  for i in range(L):
    masked = delta.copy()
    masked[:, i] = 0.0
    relative[i] = kappas[i] * masked.sum(axis=1).max()

  return to_log_scale(relative)


def ocinneide_bound(F: StochasticMatrix, Ftilde: StochasticMatrix) -> float | None:
  """
  L log max(F̃_ij/F_ij, F_ij/F̃_ij) over the off-diagonal support, or None when the supports differ.
  """
  L = _check_dims(F, Ftilde)
  off = _off_diagonal(L)
  support = F.entries > 0
  if np.any((support != (Ftilde.entries > 0)) & off):
    return None

  mask = support & off
  if not np.any(mask):
    return 0.0
  ratio = Ftilde.entries[mask] / F.entries[mask]
  return float(L * np.log(np.max(np.maximum(ratio, 1.0 / ratio))))


def cho_meyer_beta(F: StochasticMatrix) -> ChoMeyerCoefficients:
  M = mean_first_passage_matrix(F)
  Mo = M.copy()
  np.fill_diagonal(Mo, 0.0)

  # beta[i, j] = max_m |Mo[i, m] - Mo[j, m]|
  beta = np.max(np.abs(Mo[:, None, :] - Mo[None, :, :]), axis=2)
  np.fill_diagonal(beta, np.nan)
  return ChoMeyerCoefficients(beta=beta, passage=M)


def cho_meyer_bound(F: StochasticMatrix, Ftilde: StochasticMatrix, beta: ChoMeyerCoefficients | None = None) -> float:
  """∑_{i≠j} β_ij |F̃_ij - F_ij|, a bound on max_m |π_m(F̃)/π_m(F) - 1|."""
  _check_dims(F, Ftilde)
  beta = beta or cho_meyer_beta(F)
  return beta.bound(F, Ftilde)


def cho_meyer_log_bound(F: StochasticMatrix, Ftilde: StochasticMatrix, beta: ChoMeyerCoefficients | None = None) -> float:
  """The Cho-Meyer bound moved to max_m |log π_m(F̃) - log π_m(F)|."""
  return to_log_scale(cho_meyer_bound(F, Ftilde, beta))


def cho_meyer_expansion(F: StochasticMatrix, Ftilde: StochasticMatrix) -> tuple[np.ndarray, np.ndarray]:
  """
  Both sides of the exact expansion

    (π_m(F̃) - π_m(F)) / π_m(F) = ∑_{i≠j} π_i(F̃) ((1 - δ_im) E_i[τ_m] - (1 - δ_jm) E_j[τ_m]) (F̃_ij - F_ij)

  with passage times taken under F.

  :return: (left side, right side) as vectors over m
  """
  _check_dims(F, Ftilde)
  pi = stationary_distribution(F).pi
  pi_tilde = stationary_distribution(Ftilde).pi

  Mo = mean_first_passage_matrix(F)
  np.fill_diagonal(Mo, 0.0)
  delta = Ftilde.entries - F.entries
  np.fill_diagonal(delta, 0.0)

  weighted = pi_tilde[:, None] * delta
  rhs = weighted.sum(axis=1) @ Mo - np.sum(weighted, axis=0) @ Mo
  return (pi_tilde - pi) / pi, rhs


# --------------------------------------------------
# Reports
# --------------------------------------------------


def bound_report(
  F: StochasticMatrix,
  Ftilde: StochasticMatrix,
  S: SubstochasticMatrix | None = None,
  Q: SensitivityMatrix | None = None,
  source: SensitivitySource = SensitivitySource.FAST,
) -> BoundReport:
  """
  Every bound for the pair (F, F̃). S defaults to the entrywise minimum of F and F̃.
  """
  _check_dims(F, Ftilde)
  if S is None:
    S = validate_substochastic(np.minimum(F.entries, Ftilde.entries))
  if not S.irreducible:
    raise reducible_error(S.entries, "Lower envelope is reducible, no bound can be given")
  if Q is None:
    Q = compute_sensitivities(S, source)

  kappas = ipsen_meyer_kappas(F)
  report = BoundReport(
    true_error=true_relative_error(F, Ftilde),
    log_form=bound_log_form(F, Ftilde, S, Q),
    linear_form=bound_linear_form(F, Ftilde, Q),
    ipsen_meyer=float(np.max(ipsen_meyer_bound(F, Ftilde, kappas))),
    kappas=kappas,
    ocinneide=ocinneide_bound(F, Ftilde),
    cho_meyer=cho_meyer_log_bound(F, Ftilde),
    sensitivity_source=Q.source,
    fallback_columns=Q.fallback_columns,
    lower_envelope=S,
  )
  logging.debug(f"Bound report: {report.rows()}")
  return report


def sparsification_report(F: StochasticMatrix, threshold: float) -> SparsificationReport:
  """
  Drops the off-diagonal entries of F below `threshold` into the diagonal and bounds the effect.

  :raises Reducible: when the thresholded matrix is no longer irreducible
  """
  L = F.dim
  arr = F.entries
  off = _off_diagonal(L)
  drop = off & (arr > 0) & (arr < threshold)

  S = validate_substochastic(np.where(drop, 0.0, arr))
  if not S.irreducible:
    raise reducible_error(S.entries, f"Dropping entries below {threshold!r} disconnects the chain")
  Q = compute_sensitivities(S)

  sparse = np.where(drop, 0.0, arr)
  sparse[np.diag_indices(L)] += np.where(drop, arr, 0.0).sum(axis=1)
  Ftilde = validate_stochastic(sparse)

  rows, cols = np.nonzero(drop)
  dropped = [SparsifiedEntry(i=int(i), j=int(j), value=float(arr[i, j]), sensitivity=float(1.0 / Q.Q[i, j])) for i, j in zip(rows, cols)]
  logging.info(f"Dropped {len(dropped)} entries below {threshold!r}")
  return SparsificationReport(threshold=threshold, sparsified=Ftilde, dropped=dropped, report=bound_report(F, Ftilde, S, Q))
