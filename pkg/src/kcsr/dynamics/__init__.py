"""Time evolution: quantum jumps, exact master equation, full cavity."""
from .models import (
    DensityMatrix,
    EffectiveModel,
    FullCavityModel,
    OBSERVABLE_NAMES,
    TimeGrid,
    TrajectoryResult,
    mean_sem,
)
from .rng import substream
from .jumps import NumericError, ResourceError
from .engines import (
    DensitySeries,
    choose_fock_cutoff,
    evolve_master_exact,
    nnn_diagonal,
    population_rate_residual,
    prep_time,
    reconstruct_density,
    run_full_cavity,
    run_quantum_jumps,
)

__all__ = [
    "DensityMatrix", "DensitySeries", "EffectiveModel", "FullCavityModel", "NumericError", "OBSERVABLE_NAMES",
    "ResourceError", "TimeGrid", "TrajectoryResult", "choose_fock_cutoff", "evolve_master_exact", "mean_sem",
    "nnn_diagonal", "population_rate_residual", "prep_time", "reconstruct_density", "run_full_cavity",
    "run_quantum_jumps", "substream",
]
