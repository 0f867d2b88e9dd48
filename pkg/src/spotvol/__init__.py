"""Nonparametric spot-volatility estimation from high-frequency prices."""

from .baseline_bench import (BenchReport, EstimatorSpec, ExperimentSpec, TSRSVParams, ase,
                             limiting_density, rmse, run_experiment, tsrsv)
from .config import EstimatorConfig, RegimeReport, TruncationRule
from .errors import (DegenerateWindowError, GridMismatchError, InsufficientDataError,
                     NonIntegrableKernelError, RegimeError, SpotVolError)
from .kernels import KernelMoments, KernelSpec, get_kernel, l_function, moments
from .preavg import (PreAvgScheme, preaverage, spot_vol_preavg, spot_vol_preavg_path,
                     validate_regime_noise)
from .raw_estimator import spot_vol_kernel, spot_vol_kernel_path, validate_regime_no_noise
from .series import DataError, TickSeries, VolPath, series_from_csv
from .simulate import SimPath, SimScenario, heston_paper, heston_paper_jumps, simulate_batch, simulate_heston
from .tuning import (AsymptoticInputs, TunedConfig, delta_squared, integrated_moments, integrated_vvol,
                     iterate_tune, noise_variance, optimal_bandwidth, optimal_theta)
from .weights import WeightFn, phi_matrix, triangular

__version__ = "0.1.0"
