"""
mcsense Hilly Landscape

A metastable benchmark chain: a lazy walk on the ring Z/LZ in detailed balance with the Gibbs
distribution π(k) ∝ exp(-L V(k/L)) of a periodic potential V.

State k in 1..L of the landscape is row k - 1.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, ClassVar, Final, Iterable

import numpy as np
import scipy.linalg

from . import exceptions
from .matrix_core import StochasticMatrix, check_pair, ring_walk, validate_stochastic
from .sensitivities import SensitivitySource, compute_sensitivities
from .stationary import InvariantDistribution

#: Scales of S = αF used by the sensitivity heatmaps
DEFAULT_ALPHAS: Final[tuple[float, ...]] = (0.7, 0.8, 0.9, 0.95, 0.98, 1.0)

#: Ring lengths of the spectral gap study
DEFAULT_GAP_LENGTHS: Final[tuple[int, ...]] = (8, 16, 24, 32, 40)

#: Lower bound of the spectrum for a potential with Lipschitz constant 1
GERSHGORIN_FLOOR: Final[float] = 2.0 / (1.0 + math.e) - 1.0


@dataclass(frozen=True, slots=True)
class Potential:
  name: str
  function: Callable[[np.ndarray], np.ndarray]
  lipschitz: float

  def __call__(self, x: np.ndarray) -> np.ndarray:
    return self.function(x)


DEFAULT_POTENTIAL: Final[Potential] = Potential(
  name="cos4pi",
  function=lambda x: np.cos(4 * np.pi * x) / (4 * np.pi),
  lipschitz=1.0,
)


@dataclass(frozen=True, slots=True)
class HillyConfig:
  L: int
  potential: Potential = DEFAULT_POTENTIAL
  alpha: float = 1.0

  def __post_init__(self) -> None:
    if self.L < 4 or self.L % 2:
      raise ValueError(f"Ring length must be even and at least 4, got {self.L}")
    if not 0 < self.alpha <= 1:
      raise ValueError(f"Scale must be in (0, 1], got {self.alpha}")

  @property
  def grid(self) -> np.ndarray:
    return np.arange(1, self.L + 1) / self.L

  @property
  def energies(self) -> np.ndarray:
    return self.L * self.potential(self.grid)


@dataclass(frozen=True, slots=True, eq=False)
class SpectralSummary:
  """
  Spectral gap γ = 1 - max{|λ| : λ != 1}, the smallest (real part of an) eigenvalue, and the
  bottleneck ratio of a cut with the mixing time bounds it implies.
  """

  eigenvalues: np.ndarray
  gap: float
  eigen_min: float
  max_imag: float
  second: complex
  bottleneck: float
  mixing_lb: float
  mixing_ub: float
  condition_proxy: float


@dataclass(frozen=True, slots=True)
class GapRow:
  L: int
  gap: float
  log_inverse_gap: float
  bottleneck: float
  eigen_min: float
  max_imag: float
  second: float
  mixing_lb: float
  mixing_ub: float
  condition_proxy: float

  HEADER: ClassVar[tuple[str, ...]] = (
    "L",
    "gap",
    "log_inverse_gap",
    "bottleneck",
    "eigen_min",
    "max_imag",
    "second",
    "mixing_lb",
    "mixing_ub",
    "condition_proxy",
  )
  """CSV header matching `values()`"""

  def values(self) -> tuple:
    return tuple(getattr(self, name) for name in self.HEADER)


# --------------------------------------------------
# Landscape
# --------------------------------------------------


def hilly_matrix(cfg: HillyConfig) -> tuple[StochasticMatrix, InvariantDistribution]:
  """
  F_{i,i±1} = ½ π(i±1) / (π(i±1) + π(i)) with periodic indices, F_ii the remaining mass.

  :param cfg: landscape configuration, `cfg.alpha` is ignored here
  :return: the stochastic matrix and its exact Gibbs distribution
  """
  L = cfg.L
  energy = cfg.energies
  weights = np.exp(-(energy - energy.min()))
  pi = weights / weights.sum()

  up = np.roll(np.arange(L), -1)
  down = np.roll(np.arange(L), 1)
  # ½ π(i+1)/(π(i+1) + π(i)) = ½ / (1 + exp(E(i+1) - E(i)))
  right = 0.5 / (1.0 + np.exp(energy[up] - energy))
  left = 0.5 / (1.0 + np.exp(energy[down] - energy))

  F = np.zeros((L, L))
  rows = np.arange(L)
  F[rows, up] = right
  F[rows, down] = left
  F[rows, rows] = 1.0 - right - left

  matrix = validate_stochastic(F)
  residual = float(np.max(np.abs(pi @ matrix.entries - pi)))
  logging.debug(f"Hilly landscape L={L}, Gibbs residual {residual:.3e}")
  return matrix, InvariantDistribution(pi=pi, residual=residual)


def peaks(cfg: HillyConfig) -> np.ndarray:
  """Rows where V attains its maximum on the grid."""
  V = cfg.potential(cfg.grid)
  return np.flatnonzero(np.isclose(V, V.max(), rtol=0, atol=1e-12))


def valleys(cfg: HillyConfig) -> np.ndarray:
  V = cfg.potential(cfg.grid)
  return np.flatnonzero(np.isclose(V, V.min(), rtol=0, atol=1e-12))


def neighbor_entry_lower_bound(cfg: HillyConfig) -> float:
  """½ / (1 + e): a lower bound of every F_{i,i±1} when Lip(V) = 1."""
  if cfg.potential is not DEFAULT_POTENTIAL:
    raise exceptions.NonDefaultPotential(f"Bound holds for the default potential only, got {cfg.potential.name}")
  return 0.5 / (1.0 + math.e)


def ring_distance(i: int, j: int, L: int) -> int:
  d = abs(i - j) % L
  return min(d, L - d)


def random_walk_scale(alpha: float) -> float:
  """β = 3α / (2(1 + e)), the largest scale with αF >= βP for the lazy ring walk P."""
  if not 0 < alpha <= 1:
    raise ValueError(f"Scale must be in (0, 1], got {alpha}")
  return 3.0 * alpha / (2.0 * (1.0 + math.e))


def random_walk_floor(alpha: float, i: int, j: int, L: int) -> float:
  """
  (β/3)^d with d the ring distance of i and j: the probability that βP walks straight from i to j.
  """
  check_pair(i, j, L)
  return (random_walk_scale(alpha) / 3.0) ** ring_distance(i, j, L)


def random_walk_floor_matrix(alpha: float, L: int) -> np.ndarray:
  """All floors at once, NaN on the diagonal."""
  rows = np.arange(L)
  d = np.abs(rows[:, None] - rows[None, :])
  d = np.minimum(d, L - d).astype(float)
  np.fill_diagonal(d, np.nan)
  return (random_walk_scale(alpha) / 3.0) ** d


def random_walk_domination(F: StochasticMatrix, L: int | None = None) -> bool:
  """Whether F >= 3/(2(1 + e)) P entrywise, with P the lazy ring walk."""
  L = L or F.dim
  P = ring_walk(L).entries
  return bool(np.all(F.entries >= random_walk_scale(1.0) * P - 1e-15))


# --------------------------------------------------
# Spectral Diagnostics
# --------------------------------------------------


def bottleneck_ratio(F: StochasticMatrix, pi: np.ndarray, cut: Iterable[int]) -> float:
  """Φ(E) = ∑_{i∈E, j∉E} π_i F_ij / π(E)"""
  inside = np.zeros(F.dim, dtype=bool)
  inside[list(cut)] = True
  if not inside.any() or inside.all():
    raise ValueError("Cut must be a nonempty proper subset of the states")

  flow = pi[inside] @ F.entries[np.ix_(inside, ~inside)].sum(axis=1)
  return float(flow / pi[inside].sum())


def spectral_summary(F: StochasticMatrix, pi: InvariantDistribution, cut: Iterable[int]) -> SpectralSummary:
  """
  Dense eigenvalues of F, its spectral gap, and the bottleneck ratio of `cut`.

  :param F: stochastic matrix
  :param pi: its invariant distribution
  :param cut: nonempty proper subset E of the states
  :return: the spectral summary
  :rtype: SpectralSummary
  """
  try:
    eigenvalues = scipy.linalg.eigvals(F.entries)
  except (scipy.linalg.LinAlgError, ValueError) as e:
    raise exceptions.EigenFailure(f"Eigenvalue computation failed: {e}") from e

  bottleneck = bottleneck_ratio(F, pi.pi, cut)
  unit = int(np.argmin(np.abs(eigenvalues - 1.0)))
  rest = np.delete(eigenvalues, unit)

  if rest.size:
    k = int(np.argmax(np.abs(rest)))
    second = complex(rest[k])
    gap = 1.0 - float(np.abs(second))
    closest = float(np.min(np.abs(1.0 - rest)))
  else:
    second, gap, closest = 0j, 1.0, 1.0

  mixing_ub = math.log(4.0 / float(pi.pi.min())) / gap if gap > 0 else math.inf
  return SpectralSummary(
    eigenvalues=eigenvalues,
    gap=gap,
    eigen_min=float(np.min(eigenvalues.real)),
    max_imag=float(np.max(np.abs(eigenvalues.imag))),
    second=second,
    bottleneck=bottleneck,
    mixing_lb=1.0 / (4.0 * bottleneck) if bottleneck > 0 else math.inf,
    mixing_ub=mixing_ub,
    condition_proxy=1.0 / (F.dim * closest),
  )


def gap_scaling_study(L_values: Iterable[int] = DEFAULT_GAP_LENGTHS, potential: Potential = DEFAULT_POTENTIAL) -> list[GapRow]:
  """
  Spectral gap and bottleneck of the landscape for each ring length, cut at E = first half of the ring.
  """
  rows = []
  for L in L_values:
    if L < 8 or L % 2:
      raise ValueError(f"Ring lengths must be even and at least 8, got {L}")

    F, pi = hilly_matrix(HillyConfig(L=L, potential=potential))
    summary = spectral_summary(F, pi, range(L // 2))
    if summary.max_imag > 1e-8:
      logging.warning(f"L={L}: eigenvalues have imaginary parts up to {summary.max_imag:.3e}")

    rows.append(
      GapRow(
        L=L,
        gap=summary.gap,
        log_inverse_gap=-math.log(summary.gap),
        bottleneck=summary.bottleneck,
        eigen_min=summary.eigen_min,
        max_imag=summary.max_imag,
        second=summary.second.real,
        mixing_lb=summary.mixing_lb,
        mixing_ub=summary.mixing_ub,
        condition_proxy=summary.condition_proxy,
      )
    )
    logging.info(f"L={L}: gap {summary.gap:.6e}, bottleneck {summary.bottleneck:.6e}")
  return rows


def gap_slope(rows: list[GapRow]) -> float:
  """Least squares slope of log(1/γ) against L."""
  slope, _ = np.polyfit([row.L for row in rows], [row.log_inverse_gap for row in rows], 1)
  return float(slope)


# --------------------------------------------------
# Sensitivity Studies
# --------------------------------------------------


def scaled_landscape(cfg: HillyConfig) -> np.ndarray:
  """S = αF"""
  F, _ = hilly_matrix(cfg)
  return cfg.alpha * F.entries


def sensitivity_heatmap(
  cfg: HillyConfig, alpha: float | None = None, source: SensitivitySource = SensitivitySource.FAST
) -> list[tuple[int, int, float]]:
  """(i, j, -log Q_ij(αF)) for every pair i != j."""
  alpha = cfg.alpha if alpha is None else alpha
  scaled = HillyConfig(L=cfg.L, potential=cfg.potential, alpha=alpha)
  Q = compute_sensitivities(scaled_landscape(scaled), source)
  neg_log = Q.neg_log()
  return [(i, j, float(neg_log[i, j])) for i, j, _ in Q.off_diagonal()]


@dataclass(frozen=True, slots=True)
class FloorCheck:
  alpha: float
  violations: int
  min_ratio: float
  neighbor_violations: int


def floor_check(cfg: HillyConfig, alpha: float) -> FloorCheck:
  """
  Compares Q(αF) with the random walk floor and Q_{i,i±1}(αF) with α/(2(1 + e)).
  """
  scaled = HillyConfig(L=cfg.L, potential=cfg.potential, alpha=alpha)
  Q = compute_sensitivities(scaled_landscape(scaled)).Q
  floor = random_walk_floor_matrix(alpha, cfg.L)
  off = ~np.eye(cfg.L, dtype=bool)

  rows = np.arange(cfg.L)
  neighbors = np.concatenate([Q[rows, (rows + 1) % cfg.L], Q[rows, (rows - 1) % cfg.L]])
  neighbor_floor = alpha / (2.0 * (1.0 + math.e))

  return FloorCheck(
    alpha=alpha,
    violations=int(np.count_nonzero(Q[off] < floor[off])),
    min_ratio=float(np.min(Q[off] / floor[off])),
    neighbor_violations=int(np.count_nonzero(neighbors < neighbor_floor)),
  )
