"""
Sensitivity of Markov chain invariant distributions to perturbations of the transition matrix.

Provides the sensitivities Q_ij(S), the error bounds built on them, Monte Carlo checks, and the
hilly landscape benchmark.
"""

from .bounds import (
  BoundReport,
  ChoMeyerCoefficients,
  bound_linear_form,
  bound_log_form,
  bound_report,
  cho_meyer_beta,
  cho_meyer_bound,
  cho_meyer_expansion,
  cho_meyer_log_bound,
  ipsen_meyer_bound,
  ipsen_meyer_kappas,
  lower_envelope,
  ocinneide_bound,
  sharpness_witness,
  sparsification_report,
  true_relative_error,
)
from .derivatives import DerivativeSlice, derivative_matrix, derivative_slice, finite_difference_slice, logderiv_bounds
from .exceptions import (
  MatrixError,
  NotSquare,
  NonFiniteEntry,
  NegativeEntry,
  RowSumOutOfTolerance,
  RowSumExceedsOne,
  Reducible,
  SingularMatrix,
  SameIndex,
  StateOutOfRange,
  MatrixFormatError,
  SensitivityError,
  NotDominated,
  ProbabilityOutOfRange,
  BoundError,
  DominationViolated,
  NoSlack,
  EtaTooLarge,
  NonDefaultPotential,
  EigenFailure,
  SimulationError,
  ZeroSamples,
  CapExceeded,
)
from .hilly import (
  DEFAULT_POTENTIAL,
  HillyConfig,
  Potential,
  SpectralSummary,
  gap_scaling_study,
  hilly_matrix,
  neighbor_entry_lower_bound,
  random_walk_floor,
  spectral_summary,
)
from .matrix_core import (
  DenseMatrix,
  PrincipalSubmatrixView,
  StochasticMatrix,
  SubstochasticMatrix,
  invert,
  is_irreducible,
  solve_linear,
  validate_stochastic,
  validate_substochastic,
)
from .mc_verify import AugmentedChain, McEstimate, check_decomposition, estimate_occupation, estimate_q
from .sensitivities import (
  AlgorithmWorkspace,
  HittingVector,
  SensitivityMatrix,
  SensitivitySource,
  monotonicity_check,
  q_all_fast,
  q_all_oracle,
  q_single,
  q_vector,
)
from .stationary import (
  InvariantDistribution,
  OccupationMatrix,
  PassageStats,
  mean_first_passage_matrix,
  occupation_matrix,
  passage_stats,
  stationary_distribution,
  stationary_via_minors,
)

__all__: tuple[str, ...] = (
  # bounds
  "BoundReport",
  "ChoMeyerCoefficients",
  "bound_linear_form",
  "bound_log_form",
  "bound_report",
  "cho_meyer_beta",
  "cho_meyer_bound",
  "cho_meyer_expansion",
  "cho_meyer_log_bound",
  "ipsen_meyer_bound",
  "ipsen_meyer_kappas",
  "lower_envelope",
  "ocinneide_bound",
  "sharpness_witness",
  "sparsification_report",
  "true_relative_error",
  # derivatives
  "DerivativeSlice",
  "derivative_matrix",
  "derivative_slice",
  "finite_difference_slice",
  "logderiv_bounds",
  # exceptions
  "MatrixError",
  "NotSquare",
  "NonFiniteEntry",
  "NegativeEntry",
  "RowSumOutOfTolerance",
  "RowSumExceedsOne",
  "Reducible",
  "SingularMatrix",
  "SameIndex",
  "StateOutOfRange",
  "MatrixFormatError",
  "SensitivityError",
  "NotDominated",
  "ProbabilityOutOfRange",
  "BoundError",
  "DominationViolated",
  "NoSlack",
  "EtaTooLarge",
  "NonDefaultPotential",
  "EigenFailure",
  "SimulationError",
  "ZeroSamples",
  "CapExceeded",
  # hilly
  "DEFAULT_POTENTIAL",
  "HillyConfig",
  "Potential",
  "SpectralSummary",
  "gap_scaling_study",
  "hilly_matrix",
  "neighbor_entry_lower_bound",
  "random_walk_floor",
  "spectral_summary",
  # matrix_core
  "DenseMatrix",
  "PrincipalSubmatrixView",
  "StochasticMatrix",
  "SubstochasticMatrix",
  "invert",
  "is_irreducible",
  "solve_linear",
  "validate_stochastic",
  "validate_substochastic",
  # mc_verify
  "AugmentedChain",
  "McEstimate",
  "check_decomposition",
  "estimate_occupation",
  "estimate_q",
  # sensitivities
  "AlgorithmWorkspace",
  "HittingVector",
  "SensitivityMatrix",
  "SensitivitySource",
  "monotonicity_check",
  "q_all_fast",
  "q_all_oracle",
  "q_single",
  "q_vector",
  # stationary
  "InvariantDistribution",
  "OccupationMatrix",
  "PassageStats",
  "mean_first_passage_matrix",
  "occupation_matrix",
  "passage_stats",
  "stationary_distribution",
  "stationary_via_minors",
)
