import math

import numpy as np
import pytest

from mcsense import exceptions
from mcsense.bounds import (
  bound_linear_form,
  bound_log_form,
  bound_report,
  cho_meyer_beta,
  cho_meyer_bound,
  cho_meyer_expansion,
  ipsen_meyer_bound,
  ipsen_meyer_kappas,
  lower_envelope,
  ocinneide_bound,
  random_completion,
  sharpness_witness,
  sparsification_report,
  to_log_scale,
  true_relative_error,
)
from mcsense.matrix_core import random_irreducible_substochastic, validate_stochastic, validate_substochastic
from mcsense.sensitivities import SensitivitySource, q_all_fast, q_all_oracle
from mcsense.stationary import passage_stats, stationary_distribution


def completions(rng, L, count, scale=(0.5, 0.99)):
  """A fresh S for every triple, with two random completions of it."""
  for _ in range(count):
    S = random_irreducible_substochastic(L, rng, scale=scale)
    yield S, q_all_fast(S), random_completion(S, rng), random_completion(S, rng)


# --------------------------------------------------
# Two-State Fixture
# --------------------------------------------------


def test_two_state_true_error(two_state, two_state_perturbed):
  pi = stationary_distribution(two_state).pi
  pi_tilde = stationary_distribution(two_state_perturbed).pi
  assert abs(np.log(pi_tilde[0]) - np.log(pi[0])) == pytest.approx(0.0392207, abs=1e-7)
  assert true_relative_error(two_state, two_state_perturbed) == pytest.approx(math.log(1.1 / 1.04), abs=1e-12)
  assert true_relative_error(two_state, two_state) == 0.0


def test_two_state_report(two_state, two_state_perturbed):
  report = bound_report(two_state, two_state_perturbed)
  np.testing.assert_allclose(report.lower_envelope.entries, [[0.78, 0.2], [0.3, 0.7]])
  assert report.log_form == pytest.approx(math.log(1.1), abs=1e-12)
  assert report.linear_form == pytest.approx(0.1, abs=1e-12)
  assert report.ocinneide == pytest.approx(2 * math.log(1.1), abs=1e-12)
  assert report.cho_meyer == pytest.approx(-math.log(0.9), abs=1e-12)
  assert cho_meyer_bound(two_state, two_state_perturbed) == pytest.approx(0.1, abs=1e-12)
  assert report.ipsen_meyer == pytest.approx(-math.log(0.9), abs=1e-12)
  np.testing.assert_allclose(report.kappas, [10 / 3, 5.0])
  assert report.sensitivity_source is SensitivitySource.FAST
  assert report.true_error <= report.log_form <= report.linear_form
  assert [name for name, _ in report.rows()] == ["true_error", "log_form", "linear_form", "ipsen_meyer", "ocinneide", "cho_meyer"]


def test_two_state_oracle_report(two_state, two_state_perturbed):
  fast = bound_report(two_state, two_state_perturbed)
  oracle = bound_report(two_state, two_state_perturbed, source=SensitivitySource.ORACLE)
  assert oracle.sensitivity_source is SensitivitySource.ORACLE
  assert oracle.log_form == pytest.approx(fast.log_form, rel=1e-12)


def test_two_state_cho_meyer(two_state):
  beta = cho_meyer_beta(two_state)
  assert beta.beta[0, 1] == pytest.approx(5.0)
  assert beta.beta[1, 0] == pytest.approx(5.0)
  assert np.all(np.isnan(np.diag(beta.beta)))


def test_two_state_expansion(two_state, two_state_perturbed):
  lhs, rhs = cho_meyer_expansion(two_state, two_state_perturbed)
  assert lhs[0] == pytest.approx(-0.5 / 13, abs=1e-12)
  np.testing.assert_allclose(rhs, lhs, atol=1e-12)


# --------------------------------------------------
# Lower Envelope
# --------------------------------------------------


def test_lower_envelope(two_state):
  np.testing.assert_allclose(lower_envelope(two_state, 0.05).entries, [[0.75, 0.15], [0.25, 0.65]])
  np.testing.assert_array_equal(lower_envelope(two_state, 0.0).entries, two_state.entries)

  alpha = np.zeros((2, 2))
  alpha[0, 1] = 1.0
  S = lower_envelope(two_state, alpha)
  assert S.entries[0, 1] == 0.0
  assert not S.irreducible

  with pytest.raises(ValueError):
    lower_envelope(two_state, -0.1)


def test_random_completion(rng):
  S = random_irreducible_substochastic(6, rng)
  F = random_completion(S, rng)
  assert np.all(F.entries >= S.entries)
  np.testing.assert_allclose(F.entries.sum(axis=1), 1.0)


# --------------------------------------------------
# Bound Ordering
# --------------------------------------------------


def test_bounds_hold_on_completions(rng):
  for L in (3, 6, 10):
    for S, Q, F, Ftilde in completions(rng, L, 10):
      error = true_relative_error(F, Ftilde)
      log_form = bound_log_form(F, Ftilde, S, Q)
      linear_form = bound_linear_form(F, Ftilde, Q)
      assert error <= log_form * (1 + 1e-9) + 1e-14
      assert log_form <= linear_form * (1 + 1e-9) + 1e-14


@pytest.mark.slow
def test_bounds_hold_full_sweep(rng):
  violations = []
  for case in range(1000):
    L = int(rng.integers(2, 21))
    S, Q, F, Ftilde = next(completions(rng, L, 1))
    error = true_relative_error(F, Ftilde)
    log_form = bound_log_form(F, Ftilde, S, Q)
    linear_form = bound_linear_form(F, Ftilde, Q)
    if error > log_form + 1e-12 or log_form > linear_form + 1e-12:
      violations.append((case, L, error, log_form, linear_form))
  assert violations == []


def test_cho_meyer_log_scale(rng):
  # a wide spread of row slack makes the relative and log scales part
  for _, _, F, Ftilde in completions(rng, 5, 100, scale=(0.05, 0.5)):
    report = bound_report(F, Ftilde)
    assert report.true_error <= report.cho_meyer * (1 + 1e-9) + 1e-14
    assert report.cho_meyer == pytest.approx(to_log_scale(cho_meyer_bound(F, Ftilde)))


def test_to_log_scale():
  assert to_log_scale(0.0) == 0.0
  assert to_log_scale(0.1) == pytest.approx(-math.log(0.9))
  assert to_log_scale(1.0) == math.inf
  np.testing.assert_array_equal(to_log_scale(np.array([0.0, 2.0])), [0.0, math.inf])


def test_classical_bounds_hold(rng):
  for _, _, F, Ftilde in completions(rng, 5, 10):
    # Dirichlet completions have full support, so both patterns agree
    assert true_relative_error(F, Ftilde) <= ocinneide_bound(F, Ftilde) * (1 + 1e-9)

    pi = stationary_distribution(F).pi
    pi_tilde = stationary_distribution(Ftilde).pi
    assert np.max(np.abs(pi_tilde / pi - 1)) <= cho_meyer_bound(F, Ftilde) * (1 + 1e-9)

    per_state = ipsen_meyer_bound(F, Ftilde)
    assert np.all(np.abs(np.log(pi_tilde) - np.log(pi)) <= per_state * (1 + 1e-9) + 1e-14)


def test_cho_meyer_expansion_exact(rng):
  for _, _, F, Ftilde in completions(rng, 7, 5):
    lhs, rhs = cho_meyer_expansion(F, Ftilde)
    np.testing.assert_allclose(rhs, lhs, rtol=1e-8, atol=1e-12)


def test_cho_meyer_beta_lower_bound(rng):
  # E_i[τ_j] + E_j[τ_i] = 1/(π_i P_i[τ_j < τ_i])
  F = random_completion(random_irreducible_substochastic(6, rng), rng)
  beta = cho_meyer_beta(F).beta
  pi = stationary_distribution(F).pi
  for i in range(6):
    hits = passage_stats(F, i).hit_before_return
    for j in range(6):
      if i != j:
        assert beta[i, j] >= 0.5 / (pi[i] * hits[j]) * (1 - 1e-10)


def test_ipsen_meyer(two_state):
  np.testing.assert_allclose(ipsen_meyer_kappas(two_state), [10 / 3, 5.0])
  far = validate_stochastic([[0.2, 0.8], [0.9, 0.1]])
  assert np.isinf(ipsen_meyer_bound(two_state, far)).any()


def test_ocinneide_support_mismatch(two_state):
  assert ocinneide_bound(two_state, validate_stochastic([[1.0, 0.0], [0.3, 0.7]])) is None
  assert ocinneide_bound(two_state, two_state) == 0.0


# --------------------------------------------------
# Sharpness
# --------------------------------------------------


def test_sharpness_witness(rng):
  S = random_irreducible_substochastic(6, rng)
  Q = q_all_fast(S)
  slack = S.row_slack
  for i, j in [(0, 3), (2, 1), (5, 4)]:
    for fraction in (0.1, 0.5, 0.9):
      eta = fraction * slack[i]
      F, Feta = sharpness_witness(S, i, j, eta)
      assert passage_stats(F, i).hit_before_return[j] == pytest.approx(Q[i, j], rel=1e-10)

      bound = bound_log_form(F, Feta, S, Q)
      assert bound == pytest.approx(math.log1p(eta / Q[i, j]), rel=1e-10)
      error = true_relative_error(F, Feta)
      assert 0.5 * bound * (1 - 1e-9) <= error <= bound * (1 + 1e-9)


def test_sharpness_small_step(rng):
  for _ in range(10):
    S = random_irreducible_substochastic(5, rng)
    Q = q_all_fast(S)
    F, Feta = sharpness_witness(S, 1, 3, 1e-4)
    assert true_relative_error(F, Feta) >= 0.5 * 1e-4 / (Q[1, 3] + 1e-3)


def random_pair(rng, L):
  i, j = rng.choice(L, size=2, replace=False)
  return int(i), int(j)


@pytest.mark.slow
def test_sharpness_random_pairs(rng):
  violations = []
  for case in range(100):
    L = int(rng.integers(2, 11))
    S = random_irreducible_substochastic(L, rng)
    i, j = random_pair(rng, L)
    F, Feta = sharpness_witness(S, i, j, 1e-4)
    q = q_all_fast(S)[i, j]
    if true_relative_error(F, Feta) < 0.5 * 1e-4 / (q + 1e-3):
      violations.append((case, L, i, j))
  assert violations == []


@pytest.mark.slow
@pytest.mark.parametrize("eta", [1e-3, 1e-4, 1e-5])
def test_sharpness_step_sweep(rng, eta):
  for _ in range(30):
    L = int(rng.integers(2, 11))
    S = random_irreducible_substochastic(L, rng)
    i, j = random_pair(rng, L)
    F, Feta = sharpness_witness(S, i, j, eta)
    assert true_relative_error(F, Feta) >= 0.5 * eta / (q_all_fast(S)[i, j] + 1e-3)


def test_sharpness_errors():
  S = validate_substochastic([[0.5, 0.5], [0.2, 0.3]])
  with pytest.raises(exceptions.NoSlack):
    sharpness_witness(S, 0, 1, 0.1)
  with pytest.raises(exceptions.EtaTooLarge):
    sharpness_witness(S, 1, 0, 0.6)
  with pytest.raises(exceptions.EtaTooLarge):
    sharpness_witness(S, 1, 0, 0.0)
  with pytest.raises(exceptions.SameIndex):
    sharpness_witness(S, 1, 1, 0.1)


# --------------------------------------------------
# Errors
# --------------------------------------------------


def test_domination_violated(two_state, two_state_perturbed):
  S = validate_substochastic(np.minimum(two_state.entries, two_state_perturbed.entries))
  Q = q_all_oracle(S)
  below = validate_stochastic([[0.9, 0.1], [0.3, 0.7]])
  with pytest.raises(exceptions.DominationViolated):
    bound_log_form(below, two_state, S, Q)
  with pytest.raises(exceptions.DominationViolated):
    bound_linear_form(two_state, below, Q)


def test_reducible_envelope(two_state):
  S = validate_substochastic([[0.8, 0.0], [0.3, 0.7]])
  with pytest.raises(exceptions.Reducible):
    bound_report(two_state, two_state, S=S)


# --------------------------------------------------
# Sparsification
# --------------------------------------------------


def test_sparsification():
  F = validate_stochastic([[0.7, 0.299, 0.001], [0.2, 0.6, 0.2], [0.3, 0.3, 0.4]])
  result = sparsification_report(F, 0.01)

  assert [(e.i, e.j) for e in result.dropped] == [(0, 2)]
  assert result.sparsified.entries[0, 2] == 0.0
  assert result.sparsified.entries[0, 0] == pytest.approx(0.701)
  assert result.dropped[0].sensitivity >= 1.0

  report = result.report
  assert report.true_error <= report.log_form <= report.linear_form
  assert report.linear_form == pytest.approx(0.001 * result.dropped[0].sensitivity)


def test_sparsification_disconnects(two_state):
  with pytest.raises(exceptions.Reducible):
    sparsification_report(two_state, 0.5)
