import numpy as np
import pytest

from mcsense import exceptions, sensitivities
from mcsense.matrix_core import (
  PIVOT_RELATIVE_THRESHOLD,
  condition_number_inf,
  random_irreducible_stochastic,
  random_irreducible_substochastic,
  ring_walk,
  validate_substochastic,
)
from mcsense.sensitivities import (
  SensitivitySource,
  build_workspace,
  monotonicity_check,
  q_all_fast,
  q_all_oracle,
  q_single,
  q_vector,
)
from mcsense.stationary import passage_stats


def assert_oracle_equivalent(S):
  fast = q_all_fast(S).Q
  oracle = q_all_oracle(S).Q
  off = ~np.eye(S.dim, dtype=bool)
  np.testing.assert_allclose(fast[off], oracle[off], rtol=1e-10, atol=0)


# --------------------------------------------------
# Direct Solve
# --------------------------------------------------


def test_q_vector_two_state(two_state):
  S = validate_substochastic(0.5 * two_state.entries)
  hv = q_vector(S, 0, 1)
  assert hv[0] == pytest.approx(0.1)
  assert hv[0] == pytest.approx(S.entries[0, 1])


def test_q_vector_three_ring(ring3_scaled):
  hv = q_vector(ring3_scaled, 0, 1)
  assert hv[0] == pytest.approx(2 / 7)
  assert hv[2] == pytest.approx(2 / 7)
  np.testing.assert_array_equal(hv.states, [0, 2])
  with pytest.raises(exceptions.SameIndex):
    hv[1]


def test_q_single_examples(two_state, ring3_scaled):
  assert q_single(ring3_scaled, 0, 1) == pytest.approx(0.285714, abs=1e-6)
  assert q_single(two_state, 0, 1) == pytest.approx(0.2)
  assert q_single(two_state, 1, 0) == pytest.approx(0.3)


def test_q_single_symmetric_ring(ring3):
  assert q_single(ring3, 0, 1) == pytest.approx(0.5)


def test_q_vector_errors(ring3_scaled):
  with pytest.raises(exceptions.SameIndex):
    q_vector(ring3_scaled, 1, 1)
  with pytest.raises(exceptions.StateOutOfRange):
    q_vector(ring3_scaled, 0, 3)
  with pytest.raises(exceptions.Reducible):
    q_vector(validate_substochastic([[0.4, 0.0], [0.0, 0.4]]), 0, 1)


def test_q_vector_entries_are_probabilities(rng):
  for _ in range(20):
    S = random_irreducible_substochastic(8, rng)
    hv = q_vector(S, 2, 5)
    assert np.all((hv.q >= 0) & (hv.q <= 1))
    assert hv.clamped == 0


# --------------------------------------------------
# Fast Algorithm
# --------------------------------------------------


def test_q_all_fast_three_ring(ring3_scaled):
  Q = q_all_fast(ring3_scaled)
  off = ~np.eye(3, dtype=bool)
  np.testing.assert_allclose(Q.Q[off], 2 / 7, rtol=1e-12)
  assert np.all(np.isnan(np.diag(Q.Q)))
  assert Q.source is SensitivitySource.FAST
  assert Q.fallback_columns == ()


def test_q_all_fast_two_state(two_state):
  Q = q_all_fast(two_state)
  assert Q[0, 1] == pytest.approx(0.2)
  assert Q[1, 0] == pytest.approx(0.3)
  np.testing.assert_allclose(Q.inverse()[0, 1], 5.0)
  np.testing.assert_allclose(Q.neg_log()[1, 0], -np.log(0.3))


def test_q_all_fast_single_state():
  Q = q_all_fast(validate_substochastic([[0.5]]))
  assert Q.Q.shape == (1, 1)
  assert list(Q.off_diagonal()) == []


def test_q_all_fast_requires_irreducible():
  with pytest.raises(exceptions.Reducible) as info:
    q_all_fast(validate_substochastic([[0.4, 0.0], [0.0, 0.4]]))
  assert info.value.components == [[0], [1]]
  assert "[[0], [1]]" in str(info.value)


def test_oracle_equivalence(rng):
  for _ in range(40):
    L = int(rng.integers(2, 21))
    S = random_irreducible_substochastic(L, rng, density=float(rng.uniform(0.05, 0.8)))
    assert_oracle_equivalent(S)


def test_oracle_equivalence_stochastic(rng):
  for _ in range(10):
    F = random_irreducible_stochastic(int(rng.integers(2, 15)), rng, density=0.3)
    assert_oracle_equivalent(F)


@pytest.mark.slow
def test_oracle_equivalence_full_sweep(rng):
  for _ in range(200):
    L = int(rng.integers(2, 51))
    S = random_irreducible_substochastic(L, rng, density=float(rng.uniform(0.02, 0.8)))
    assert_oracle_equivalent(S)


def test_capacitance_fallback_matches_oracle(rng):
  S = random_irreducible_substochastic(7, rng)
  Q = q_all_fast(S, threshold=np.inf)
  assert Q.fallback_columns == tuple(range(1, 7))
  off = ~np.eye(7, dtype=bool)
  np.testing.assert_allclose(Q.Q[off], q_all_oracle(S).Q[off], rtol=1e-12)


def test_workspace_inverse(rng):
  S = random_irreducible_substochastic(12, rng)
  ws = build_workspace(S)
  np.testing.assert_allclose(ws.A @ ws.ainv, np.eye(12), atol=1e-10)
  np.testing.assert_allclose(ws.sainv, S.entries @ ws.ainv, atol=1e-12)


def test_scaled_chain_condition_bound(rng):
  # A(0)⁻¹ has ∞-norm at most 1/(1 - α) and A(0) at most 1 + α
  for alpha in (0.5, 0.9, 0.99):
    F = random_irreducible_stochastic(10, rng)
    Q = q_all_fast(validate_substochastic(alpha * F.entries))
    assert Q.condition <= 2.0 / (1.0 - alpha) * (1 + 1e-9)


def test_sensitivities_dominate_entries(rng):
  for _ in range(20):
    S = random_irreducible_substochastic(int(rng.integers(2, 12)), rng)
    Q = q_all_fast(S).Q
    off = ~np.eye(S.dim, dtype=bool)
    assert np.all(Q[off] >= S.entries[off] - 1e-15)
    assert np.all((Q[off] > 0) & (Q[off] <= 1))


def test_stochastic_reduction(rng):
  F = random_irreducible_stochastic(8, rng)
  Q = q_all_fast(F).Q
  for i in range(8):
    hits = passage_stats(F, i).hit_before_return
    others = np.arange(8) != i
    np.testing.assert_allclose(Q[i, others], hits[others], rtol=1e-10)


def test_ring_walk_path_lower_bound():
  for beta in (0.2, 0.5, 0.9):
    L = 9
    Q = q_all_fast(validate_substochastic(beta * ring_walk(L).entries)).Q
    for i in range(L):
      for j in range(L):
        if i != j:
          d = min(abs(i - j), L - abs(i - j))
          assert Q[i, j] >= (beta / 3) ** d * (1 - 1e-12)


# --------------------------------------------------
# Monotonicity
# --------------------------------------------------


def test_monotonicity_examples(rng):
  S = random_irreducible_substochastic(6, rng)
  assert monotonicity_check(S, S)

  F = random_irreducible_stochastic(6, rng)
  assert monotonicity_check(validate_substochastic(0.5 * F.entries), validate_substochastic(0.9 * F.entries))
  assert monotonicity_check(validate_substochastic(0.5 * F.entries), F)


def test_monotonicity_requires_domination(rng):
  F = random_irreducible_stochastic(4, rng)
  with pytest.raises(exceptions.NotDominated):
    monotonicity_check(validate_substochastic(0.9 * F.entries), validate_substochastic(0.5 * F.entries))


def test_fast_inverts_once(rng, monkeypatch):
  calls = []
  original = sensitivities.invert

  def counting(A, threshold=PIVOT_RELATIVE_THRESHOLD):
    calls.append(np.shape(A))
    return original(A, threshold)

  monkeypatch.setattr(sensitivities, "invert", counting)
  S = random_irreducible_substochastic(15, rng)
  Q = q_all_fast(S)
  assert calls == [(15, 15)]
  assert Q.condition == pytest.approx(condition_number_inf(build_workspace(S).A), rel=1e-12)


def test_tolerance_overrides(rng):
  S = random_irreducible_substochastic(6, rng)
  with pytest.raises(exceptions.SingularMatrix):
    q_all_fast(S, pivot=1e3)
  with pytest.raises(exceptions.SingularMatrix):
    q_single(S, 0, 1, pivot=1e3)

  relaxed = q_all_fast(S, threshold=np.inf, slack=1e-6, pivot=1e-15)
  np.testing.assert_allclose(relaxed.Q, q_all_fast(S).Q, rtol=1e-12)
