from .solver import (
    NsParams,
    RingForcing,
    SpectralWorkspace,
    energy,
    enstrophy,
    pixel_perturbation,
    poisson_invert,
    run_to_stationarity,
    step,
)
