"""Local likelihood estimation and GLR testing of conditional copula calibration."""

from types import ModuleType as _ModuleType

__version__ = "0.1.0"

from .calibration import (BandwidthSelection, CalibrationModel, ConvergenceError,
                          Dataset, InsufficientLocalData, LocalFit,
                          estimate_curve, fit_parametric, local_polynomial_fit,
                          loo_cv_bandwidth, loo_scores, pseudo_observations)
from .copulas import (CLAYTON, FRANK, CopulaDomainError, CopulaSpec, Family,
                      Link, UniformPair, conditional_cdf, conditional_quantile,
                      copula_cdf, density, ell, ell1, ell2, ell_derivatives,
                      log_density, sample_pair)
from .estimators import (CalibrationGLRT, LocalCalibration,
                         ParametricCalibration, PseudoObservations)
from .glrt import (GlrtResult, chisq_upper_tail, loglik_under_alt,
                   loglik_under_null, regularized_gamma_q, run_test)
from .kernels import (EPANECHNIKOV, UNIFORM, EquivalentKernel, KernelConstants,
                      KernelSpec, constants_for, equivalent_kernel,
                      kernel_self_convolution, null_dof)
from .simulation import (Model, ScenarioResult, ScenarioSpec, generate_dataset,
                         run_scenario, wilks_check)

__all__ = sorted(name for name, obj in globals().items()
                 if not name.startswith("_") and not isinstance(obj, _ModuleType))
