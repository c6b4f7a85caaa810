"""
mcsense Monte Carlo Verification

Seeded trajectory simulation that estimates the probabilistic quantities behind the sensitivities,
as an independent check of the linear algebra.

Trajectories are simulated in lockstep within fixed-size blocks. Block b draws from the stream
SeedSequence(seed, spawn_key=(stream, b)), so an estimate depends only on the seed and n, not on
the number of threads.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from typing import Final

import numpy as np

from . import exceptions
from .matrix_core import StochasticMatrix, SubstochasticMatrix, as_substochastic, check_pair, check_state

#: Step cap per trajectory
DEFAULT_MAX_STEPS: Final[int] = 10**8

#: Trajectories per random stream
DEFAULT_BLOCK_SIZE: Final[int] = 4096

#: Default sample count
DEFAULT_SAMPLES: Final[int] = 100_000

#: Environment variable with the default thread count
THREADS_ENV: Final[str] = "MC_SENSE_THREADS"


def default_threads() -> int:
  value = os.environ.get(THREADS_ENV)
  if value:
    return max(1, int(value))
  return os.cpu_count() or 1


# --------------------------------------------------
# Types
# --------------------------------------------------


@dataclass(frozen=True, slots=True, eq=False)
class AugmentedChain:
  """
  The chain of S on the states 0..L-1 plus the absorbing state ω = L, which receives the missing
  row mass of S.
  """

  base: SubstochasticMatrix
  absorb_prob: np.ndarray
  cdf: np.ndarray

  @classmethod
  def from_matrix(cls, S) -> AugmentedChain:
    S = as_substochastic(S)
    absorb = S.row_slack
    cdf = np.cumsum(np.hstack([S.entries, absorb[:, None]]), axis=1)
    cdf[:, -1] = 1.0
    return cls(base=S, absorb_prob=absorb, cdf=cdf)

  @property
  def omega(self) -> int:
    return self.base.dim

  def step(self, states: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse CDF transition: the next state is the first k with u < cdf[state, k]."""
    return np.sum(u[:, None] >= self.cdf[states], axis=1)


@dataclass(frozen=True, slots=True)
class McEstimate:
  point: float
  stderr: float
  n: int
  seed: int

  def z_score(self, exact: float) -> float:
    if self.stderr == 0:
      return 0.0 if self.point == exact else math.inf
    return (self.point - exact) / self.stderr

  def covers(self, exact: float, width: float = 4.0) -> bool:
    return abs(self.point - exact) <= width * self.stderr


@dataclass(frozen=True, slots=True, eq=False)
class Excursions:
  """Per-trajectory records of a batch of simulated excursions."""

  steps: np.ndarray
  final: np.ndarray
  first_watch: np.ndarray
  count: np.ndarray
  count_after_watch: np.ndarray


# --------------------------------------------------
# Simulation
# --------------------------------------------------


def _block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
  return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, block)))


def _simulate_block(
  chain: AugmentedChain,
  start: int,
  stop: tuple[int, ...],
  watch: int,
  count_state: int,
  size: int,
  rng: np.random.Generator,
  max_steps: int,
) -> Excursions:
  """
  Runs `size` trajectories from `start` until the first time s > 0 with X_s in `stop` or X_s = ω.

  Records the stopping time and state, the first time s > 0 with X_s = `watch` (-1 if never), the
  visits to `count_state` at times s < stopping time, and those visits from the first watch on.
  """
  state = np.full(size, start)
  alive = np.ones(size, dtype=bool)
  steps = np.zeros(size, dtype=np.int64)
  final = np.full(size, -1)
  first_watch = np.full(size, -1, dtype=np.int64)
  count = (state == count_state).astype(np.int64)
  count_after = np.zeros(size, dtype=np.int64)
  stop_states = np.array(stop + (chain.omega,))

  t = 0
  while alive.any():
    if t >= max_steps:
      raise exceptions.CapExceeded(f"{np.count_nonzero(alive)} trajectories still running after {max_steps} steps")

    idx = np.flatnonzero(alive)
    nxt = chain.step(state[idx], rng.random(idx.size))
    t += 1
    state[idx] = nxt

    seen = (nxt == watch) & (first_watch[idx] < 0)
    first_watch[idx[seen]] = t

    stopped = np.isin(nxt, stop_states)
    visit = (nxt == count_state) & ~stopped
    count[idx[visit]] += 1
    count_after[idx[visit & (first_watch[idx] >= 0)]] += 1

    done = idx[stopped]
    steps[done] = t
    final[done] = nxt[stopped]
    alive[done] = False

  return Excursions(steps=steps, final=final, first_watch=first_watch, count=count, count_after_watch=count_after)


def simulate_excursions(
  chain: AugmentedChain,
  start: int,
  stop: tuple[int, ...],
  n: int,
  seed: int,
  stream: int = 0,
  watch: int = -1,
  count_state: int = -1,
  threads: int | None = None,
  block_size: int = DEFAULT_BLOCK_SIZE,
  max_steps: int = DEFAULT_MAX_STEPS,
) -> Excursions:
  """
  Simulates `n` excursions in blocks of `block_size`, spread over `threads` workers.

  :param chain: augmented chain to simulate
  :param start: initial state of every trajectory
  :param stop: states that end a trajectory when hit at a time s > 0
  :param n: number of trajectories
  :param seed: root seed
  :param stream: independent stream id, so different quantities of one check do not share draws
  :return: records concatenated in trajectory order
  :rtype: Excursions
  """
  if n < 1:
    raise exceptions.ZeroSamples(f"Need at least one trajectory, got {n}")

  sizes = [min(block_size, n - lo) for lo in range(0, n, block_size)]
  threads = threads or default_threads()

  def run(block: int) -> Excursions:
    rng = _block_rng(seed, stream, block)
    return _simulate_block(chain, start, stop, watch, count_state, sizes[block], rng, max_steps)

  logging.debug(f"Simulating {n} excursions from {start} in {len(sizes)} blocks on {threads} threads")
  if threads == 1 or len(sizes) == 1:
    blocks = [run(b) for b in range(len(sizes))]
  else:
    with ThreadPoolExecutor(max_workers=threads) as executor:
      blocks = list(executor.map(run, range(len(sizes))))

  return Excursions(*(np.concatenate([getattr(b, f.name) for b in blocks]) for f in fields(Excursions)))


# --------------------------------------------------
# Estimators
# --------------------------------------------------


def _bernoulli(successes: np.ndarray, n: int, seed: int) -> McEstimate:
  p = float(np.mean(successes))
  return McEstimate(point=p, stderr=math.sqrt(p * (1.0 - p) / n), n=n, seed=seed)


def _mean(values: np.ndarray, n: int, seed: int) -> McEstimate:
  std = float(np.std(values, ddof=1)) if n > 1 else 0.0
  return McEstimate(point=float(np.mean(values)), stderr=std / math.sqrt(n), n=n, seed=seed)


def estimate_q(S, i: int, j: int, n: int = DEFAULT_SAMPLES, seed: int = 0, threads: int | None = None) -> McEstimate:
  """
  Estimates Q_ij(S) = P_i[τ_j < min(τ_i, τ_ω)] as the fraction of excursions from i that reach j.

  :param S: substochastic (or stochastic) matrix, irreducibility is not required
  :param n: number of trajectories
  :param seed: root seed
  :return: Bernoulli estimate with standard error sqrt(p(1 - p)/n)
  :rtype: McEstimate
  """
  chain = AugmentedChain.from_matrix(S)
  check_pair(i, j, chain.base.dim)
  runs = simulate_excursions(chain, i, (i, j), n, seed, threads=threads)
  return _bernoulli(runs.final == j, n, seed)


def estimate_occupation(
  F: StochasticMatrix, j: int, i: int, m: int, n: int = DEFAULT_SAMPLES, seed: int = 0, threads: int | None = None
) -> McEstimate:
  """Estimates E_j[∑_{s<τ_i} 1_m(X_s)], the entry N[j][m] of (I - F_i)⁻¹."""
  chain = AugmentedChain.from_matrix(F)
  check_pair(i, j, chain.base.dim)
  check_state(m, chain.base.dim)
  runs = simulate_excursions(chain, j, (i,), n, seed, count_state=m, threads=threads)
  return _mean(runs.count, n, seed)


def check_decomposition(
  F: StochasticMatrix, i: int, j: int, n: int = DEFAULT_SAMPLES, seed: int = 0, m: int | None = None, threads: int | None = None
) -> tuple[McEstimate, McEstimate]:
  """
  Estimates both sides of P_i[τ_j < τ_i] E_j[τ_i] = E_i[τ_i - τ_j; τ_j < τ_i].

  With `m`, both sides count visits to m instead of time:
  P_i[τ_j < τ_i] E_j[∑_{s<τ_i} 1_m(X_s)] = E_i[∑_{τ_j<=s<τ_i} 1_m(X_s)].

  The left side is the product of two independent estimates, with a delta-method standard error.

  :return: (left side, right side)
  """
  chain = AugmentedChain.from_matrix(F)
  check_pair(i, j, chain.base.dim)
  count_state = -1 if m is None else m
  if m is not None:
    check_state(m, chain.base.dim)

  from_i = simulate_excursions(chain, i, (i,), n, seed, stream=0, watch=j, count_state=count_state, threads=threads)
  from_j = simulate_excursions(chain, j, (i,), n, seed, stream=1, count_state=count_state, threads=threads)

  reached = from_i.first_watch >= 0
  p = _bernoulli(reached, n, seed)

  if m is None:
    remaining = np.where(reached, from_i.steps - from_i.first_watch, 0)
    hit = _mean(from_j.steps, n, seed)
  else:
    remaining = from_i.count_after_watch
    hit = _mean(from_j.count, n, seed)

  lhs = McEstimate(
    point=p.point * hit.point,
    stderr=math.sqrt((hit.point * p.stderr) ** 2 + (p.point * hit.stderr) ** 2),
    n=n,
    seed=seed,
  )
  return lhs, _mean(remaining, n, seed)
