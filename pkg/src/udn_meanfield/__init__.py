"""Mean-field interference, energy-efficient power control and Monte-Carlo
validation for ultra-dense cellular downlinks."""

__version__ = "0.1.0"

from .errors import (ConvergenceError, DomainError, InsufficientDataError, NoBaseStationError,  # noqa: E402
                     ParameterError)
from .geometry import (DensityConfig, NetworkSnapshot, active_probability, associate,  # noqa: E402
                       compute_active_flags, coverage_probability, generate_snapshot, nearest_bs, sample_ppp,
                       truncation_radius)
from .channel import (AntennaModel, FadingParams, FadingState, RicianMarginal, evolve_fading,  # noqa: E402
                      fading_log_moment, fading_marginal, fading_second_moment, fpk_residual, path_loss,
                      rician_pdf, sample_rician)
from .meanfield import (EmpiricalMeasure, MFInterference, NetworkConfig, UDNDiagnostics,  # noqa: E402
                        empirical_mf_measure, kantorovich_gap, mean_pathloss_to_typical, mf_interference, mf_rate,
                        normalized_noise, udn_condition_check)
from .ee import (EEParams, EEResult, GumbelParams, baseline_fixed_power, baseline_full_search,  # noqa: E402
                 compute_c1, ee_ccdf, ee_closed_form, ee_gumbel_mean, gumbel_params, lambert_w0, make_ee_params,
                 optimal_power_fixed_point)
from .montecarlo import (EstimateWithCI, SimConfig, TrajectoryResult, estimate_average_rate,  # noqa: E402
                         estimate_normalized_interference, estimate_outage, rate_sweep, simulate_trajectory,
                         stationary_ee_sweep, validate_active_probability)
