"""
mcsense Exceptions
"""


class MatrixError(Exception):
  """Base class for matrix validation and linear algebra errors."""


class NotSquare(MatrixError):
  pass


class NonFiniteEntry(MatrixError):
  pass


class NegativeEntry(MatrixError):
  pass


class RowSumOutOfTolerance(MatrixError):
  pass


class RowSumExceedsOne(MatrixError):
  pass


class Reducible(MatrixError):
  """Raised when a chain is not irreducible. `components` lists the strongly connected components."""

  def __init__(self, message: str, components: list[list[int]] | None = None) -> None:
    super().__init__(message)
    self.components = components or []


class SingularMatrix(MatrixError):
  pass


class SameIndex(MatrixError):
  pass


class StateOutOfRange(MatrixError):
  pass


class MatrixFormatError(MatrixError):
  pass


class SensitivityError(Exception):
  """Base class for sensitivity computation errors."""


class NotDominated(SensitivityError):
  pass


class ProbabilityOutOfRange(SensitivityError):
  pass


class BoundError(Exception):
  """Base class for perturbation bound and landscape study errors."""


class DominationViolated(BoundError):
  pass


class NoSlack(BoundError):
  pass


class EtaTooLarge(BoundError):
  pass


class NonDefaultPotential(BoundError):
  pass


class EigenFailure(BoundError):
  pass


class SimulationError(Exception):
  """Base class for Monte Carlo simulation errors."""


class ZeroSamples(SimulationError):
  pass


class CapExceeded(SimulationError):
  pass
