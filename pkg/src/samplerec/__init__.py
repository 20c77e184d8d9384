"""Sampling recovery on reproducing kernel Hilbert spaces.

Draw points from a Christoffel-type density, certify matrix concentration,
thin the sample to O(m) points by spectral subsampling, recover by weighted
least squares and measure exact worst-case errors on a grid model.
"""

from .errors import (AdversaryScopeExceeded, ConcentrationFailure, DegenerateDensity,
                     FiniteRankSignal, InvalidArgument, InvalidConfig, OracleScopeExceeded,
                     PlanFailure, RecoveryError, SparsifyFailure)
from .spectral import (DomainGrid, SpectralModel, TailStats, diagonal_kernel, gamma_m,
                       kernel_eval, tail_stats, tail_sum)
from .density import (SampleBatch, concentration_check, density_eval, draw_points,
                      info_vectors, resample_until_concentrated, target_diagonal)
from .subsample import (PaddedSystem, SubsampleCertificate, certify, greedy_sparsify,
                        pad_identity, partition_oracle, reduce_to_finite)
from .recovery import RecoveryPlan, build_plan, plan_from_points, recover, spline_interpolant
from .analysis import (ErrorReport, analyze, kernel_certificate, rate_fit, theorem_bounds,
                       worst_case_error_ls, worst_case_error_spline)
from .zoo import finite_rank, fourier_sobolev, surrogate_rkhs, tensor_product_model
from .haar import HaarClassSpec, haar_adversary

__version__ = "0.1.0"
