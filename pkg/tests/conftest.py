import numpy as np
import pytest

from mcsense.matrix_core import ring_walk, validate_stochastic, validate_substochastic


@pytest.fixture
def two_state():
  """F with F_01 = 0.2, F_10 = 0.3 and π = (0.6, 0.4)."""
  return validate_stochastic([[0.8, 0.2], [0.3, 0.7]])


@pytest.fixture
def two_state_perturbed():
  return validate_stochastic([[0.78, 0.22], [0.3, 0.7]])


@pytest.fixture
def ring3():
  return ring_walk(3)


@pytest.fixture
def ring3_scaled():
  """(2/3) P for the lazy 3-ring walk: every entry is 2/9."""
  return validate_substochastic(np.full((3, 3), 2.0 / 9.0))


@pytest.fixture
def rng():
  return np.random.default_rng(20240611)
