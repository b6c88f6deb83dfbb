"""Spectral-regularized function-on-function polynomial regression."""

from .estimator import (EigenSystem, PolyRegEstimate, SpectralPolyRegressor, fit, predict,
                        spectral_coefficients)
from .exceptions import (ConfigError, ConstructionBugError, DegenerateOracleError, DomainError,
                         EpsilonTooLargeError, FofPolyError, GridMismatchError,
                         InvalidArgumentError, NumericError, OutOfRangeError,
                         ResourceLimitError, SearchFailureError)
from .functional import (FeatureGram, FunctionalData, FunctionalSample, Grid, cosine_basis,
                         feature_gram, feature_inner, gram_matrix, l2_inner, l2_norm, make_grid,
                         polynomial_kernel, read_csv, write_csv)
from .metrics import (ErrorReport, RateReport, effective_dimension, estimation_error,
                      oracle_basis_error, prediction_error, psi, rate_fit, theoretical_lambda,
                      theoretical_rate)
from .minimax import (Codebook, HypothesisFamily, hypothesis_family, kl_divergence,
                      lower_bound_report, separation_check, tsybakov_bound, vg_codebook)
from .regularization import (FAMILY_NAMES, FamilyCheckReport, RegularizationFamily,
                             check_family, g_apply, get_family, residual)
from .source import Holder, Tabulated, index_function_from_spec
from .synth import (NoiseSpec, OracleModel, ProcessSpec, TargetSpec, build_oracle,
                    draw_process, draw_processes, gen_dataset, make_target, source_coefficients)

__version__ = "0.1.0"
