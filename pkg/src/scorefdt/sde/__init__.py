from .models import (
    BarotropicModelParams,
    ScalarModelParams,
    SdeModel,
    TriadModelParams,
    make_barotropic,
    make_scalar,
    make_triad,
    ornstein_uhlenbeck,
    triad_sigma_tau,
)
from .integrators import (
    EnsembleSpec,
    Trajectory,
    apply_normalization,
    denormalize,
    ensemble_run,
    euler_maruyama,
    langevin_chains,
    langevin_sample,
    normalize,
    pool_states,
    stationary_chains,
)
from .stats import autocorrelation, autocovariance, decorrelation_lag, integrated_autocorrelation_time
from .io import (
    load_trajectory_binary,
    load_trajectory_csv,
    save_trajectory_binary,
    save_trajectory_csv,
)
