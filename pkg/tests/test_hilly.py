import math
from pathlib import Path

import numpy as np
import pytest

from mcsense import exceptions
from mcsense.hilly import (
  DEFAULT_ALPHAS,
  DEFAULT_GAP_LENGTHS,
  GERSHGORIN_FLOOR,
  HillyConfig,
  Potential,
  bottleneck_ratio,
  floor_check,
  gap_scaling_study,
  gap_slope,
  hilly_matrix,
  neighbor_entry_lower_bound,
  peaks,
  random_walk_domination,
  random_walk_floor,
  random_walk_floor_matrix,
  random_walk_scale,
  ring_distance,
  sensitivity_heatmap,
  spectral_summary,
  valleys,
)
from mcsense.matrix_core import validate_substochastic
from mcsense.matrix_io import read_csv
from mcsense.sensitivities import SensitivitySource, q_all_fast
from mcsense.stationary import stationary_distribution

SNAPSHOT = Path(__file__).parent / "data" / "hilly_L40_alpha0.95.csv"


@pytest.fixture(scope="module")
def landscape():
  cfg = HillyConfig(L=40)
  F, pi = hilly_matrix(cfg)
  return cfg, F, pi


# --------------------------------------------------
# Landscape
# --------------------------------------------------


def test_config_validation():
  for L in (2, 5, 41):
    with pytest.raises(ValueError):
      HillyConfig(L=L)
  with pytest.raises(ValueError):
    HillyConfig(L=40, alpha=0.0)
  with pytest.raises(ValueError):
    HillyConfig(L=40, alpha=1.5)


def test_detailed_balance(landscape):
  _, F, pi = landscape
  arr, p = F.entries, pi.pi
  rows = np.arange(40)
  up = (rows + 1) % 40
  np.testing.assert_allclose(p * arr[rows, up], p[up] * arr[up, rows], rtol=1e-14, atol=0)
  np.testing.assert_allclose(arr.sum(axis=1), 1.0, rtol=0, atol=1e-15)
  assert pi.residual < 1e-14


def test_gibbs_is_stationary(landscape):
  _, F, pi = landscape
  np.testing.assert_allclose(stationary_distribution(F).pi, pi.pi, rtol=1e-10)


def test_peaks_and_valleys(landscape):
  cfg, _, pi = landscape
  np.testing.assert_array_equal(peaks(cfg), [19, 39])
  np.testing.assert_array_equal(valleys(cfg), [9, 29])
  assert np.argmax(pi.pi) in (9, 29)
  assert np.argmin(pi.pi) in (19, 39)


def test_neighbor_entries(landscape):
  cfg, F, _ = landscape
  bound = neighbor_entry_lower_bound(cfg)
  assert bound == pytest.approx(0.134471, abs=1e-6)

  rows = np.arange(40)
  assert np.all(F.entries[rows, (rows + 1) % 40] >= bound)
  assert np.all(F.entries[rows, (rows - 1) % 40] >= bound)


def test_neighbor_bound_needs_default_potential():
  flat = Potential(name="flat", function=lambda x: np.zeros_like(x), lipschitz=0.0)
  with pytest.raises(exceptions.NonDefaultPotential):
    neighbor_entry_lower_bound(HillyConfig(L=8, potential=flat))


def test_flat_potential_is_ring_walk():
  flat = Potential(name="flat", function=lambda x: np.zeros_like(x), lipschitz=0.0)
  F, pi = hilly_matrix(HillyConfig(L=8, potential=flat))
  np.testing.assert_allclose(pi.pi, np.full(8, 1 / 8))
  assert F.entries[0, 1] == pytest.approx(0.25)
  assert F.entries[0, 0] == pytest.approx(0.5)


# --------------------------------------------------
# Sensitivities
# --------------------------------------------------


@pytest.mark.parametrize("alpha", DEFAULT_ALPHAS)
def test_neighbor_sensitivities(landscape, alpha):
  _, F, _ = landscape
  Q = q_all_fast(validate_substochastic(alpha * F.entries)).inverse()
  rows = np.arange(40)
  limit = 2 * (1 + math.e) / alpha
  assert np.all(Q[rows, (rows + 1) % 40] <= limit)
  assert np.all(Q[rows, (rows - 1) % 40] <= limit)


def test_valley_to_valley_is_hardest(landscape):
  _, F, _ = landscape
  Q = q_all_fast(F)
  assert Q[29, 9] < Q[19, 9]

  inverse = Q.inverse()
  from_peak = np.nanmax(inverse[19])
  assert from_peak <= min(inverse[9, 29], inverse[29, 9])


def test_random_walk_constants():
  assert random_walk_scale(1.0) == pytest.approx(0.403412, abs=1e-6)
  assert random_walk_floor(1.0, 0, 1, 40) == pytest.approx(1 / (2 * (1 + math.e)))
  assert random_walk_floor(1.0, 0, 39, 40) == random_walk_floor(1.0, 0, 1, 40)
  assert ring_distance(3, 37, 40) == 6
  with pytest.raises(exceptions.SameIndex):
    random_walk_floor(1.0, 4, 4, 40)
  with pytest.raises(ValueError):
    random_walk_scale(0.0)

  floors = random_walk_floor_matrix(0.9, 10)
  assert np.all(np.isnan(np.diag(floors)))
  assert floors[2, 7] == pytest.approx(random_walk_floor(0.9, 2, 7, 10))


def test_random_walk_domination(landscape):
  _, F, _ = landscape
  assert random_walk_domination(F)


def test_neighbor_sensitivity_below_walk_scale(landscape):
  # on the steepest uphill edges Q_{i,i+1}(F) is close to F_{i,i+1}, well below 3/(2(1 + e))
  _, F, _ = landscape
  Q = q_all_fast(F).Q
  rows = np.arange(40)
  assert np.min(Q[rows, (rows + 1) % 40]) < random_walk_scale(1.0)


@pytest.mark.parametrize("alpha", [0.7, 0.95, 1.0])
def test_floor_check(landscape, alpha):
  cfg, _, _ = landscape
  check = floor_check(cfg, alpha)
  assert check.violations == 0
  assert check.neighbor_violations == 0
  assert check.min_ratio >= 1.0


def test_heatmap_layout():
  triples = sensitivity_heatmap(HillyConfig(L=8), 0.9)
  assert len(triples) == 8 * 7
  assert all(i != j for i, j, _ in triples)
  assert all(value > 0 for _, _, value in triples)


def test_heatmap_oracle_agrees():
  fast = sensitivity_heatmap(HillyConfig(L=12), 0.95)
  oracle = sensitivity_heatmap(HillyConfig(L=12), 0.95, SensitivitySource.ORACLE)
  np.testing.assert_allclose([v for *_, v in fast], [v for *_, v in oracle], rtol=1e-10)


@pytest.mark.parametrize("source", [SensitivitySource.FAST, SensitivitySource.ORACLE])
def test_heatmap_snapshot(source):
  # reference values from an independent inversion of every A(j)
  assert SNAPSHOT.exists(), f"Missing snapshot {SNAPSHOT}"
  with open(SNAPSHOT, newline="") as f:
    expected = read_csv(f)

  triples = sensitivity_heatmap(HillyConfig(L=40), 0.95, source)
  assert expected.shape == (40 * 39, 3)
  np.testing.assert_array_equal(expected[:, :2], [(i, j) for i, j, _ in triples])
  np.testing.assert_allclose([v for *_, v in triples], expected[:, 2], rtol=1e-8)


# --------------------------------------------------
# Spectral Diagnostics
# --------------------------------------------------


def test_spectral_two_state(two_state):
  summary = spectral_summary(two_state, stationary_distribution(two_state), [0])
  np.testing.assert_allclose(np.sort(summary.eigenvalues.real), [0.5, 1.0])
  assert summary.gap == pytest.approx(0.5)
  assert summary.second.real == pytest.approx(0.5)
  assert summary.bottleneck == pytest.approx(0.2)
  assert bottleneck_ratio(two_state, np.array([0.6, 0.4]), [1]) == pytest.approx(0.3)


def test_spectral_three_ring(ring3):
  summary = spectral_summary(ring3, stationary_distribution(ring3), [0])
  np.testing.assert_allclose(np.sort(summary.eigenvalues.real), [0.0, 0.0, 1.0], atol=1e-14)
  assert summary.gap == pytest.approx(1.0)


def test_bottleneck_cut_validation(two_state):
  pi = np.array([0.6, 0.4])
  with pytest.raises(ValueError):
    bottleneck_ratio(two_state, pi, [])
  with pytest.raises(ValueError):
    bottleneck_ratio(two_state, pi, [0, 1])


def test_gap_scaling():
  rows = gap_scaling_study()
  assert [row.L for row in rows] == list(DEFAULT_GAP_LENGTHS)

  log_inverse = [row.log_inverse_gap for row in rows]
  assert all(a < b for a, b in zip(log_inverse, log_inverse[1:]))
  assert gap_slope(rows) > 0

  for row in rows:
    assert row.max_imag <= 1e-8
    assert row.eigen_min >= GERSHGORIN_FLOOR - 1e-10
    assert 0 < row.bottleneck < 1
    assert row.mixing_lb <= row.mixing_ub
  assert rows[-1].second > 0
  assert GERSHGORIN_FLOOR == pytest.approx(-0.462117, abs=1e-6)


def test_gap_scaling_rejects_short_rings():
  with pytest.raises(ValueError):
    gap_scaling_study([6])
  with pytest.raises(ValueError):
    gap_scaling_study([9])
