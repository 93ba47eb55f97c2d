"""Pseudo-spectral cubic defocusing Schrodinger equation on periodic tori,
with a smoothing-multiplier laboratory: modified energies, rescaling,
almost-conservation sweeps, and dispersive norm diagnostics."""

from .grid import Grid, make_grid
from .field import (
    Field,
    PHYSICAL,
    SPECTRAL,
    change_resolution,
    load_field,
    rescale,
    save_field,
    to_physical,
    to_spectral,
    transform,
)
from .multipliers import (
    BracketPower,
    DyadicShell,
    GradientWeight,
    RadialSymbol,
    SmoothingMultiplier,
    TabulatedRadial,
    apply_symbol,
    dyadic_project,
    dyadic_shell_range,
    smoothing_multiplier,
    symbol_value,
)
from .dynamics import (
    StepperConfig,
    Trajectory,
    default_dt,
    evolve,
    fit_dt,
    linear_step,
    nonlinear_step,
    strang_step,
)
from .functionals import (
    AdmissiblePair,
    bump_window,
    check_admissible,
    energy,
    hs_energy_comparison,
    kinetic_energy,
    lp_norm,
    mass,
    mixed_norm,
    modified_energy,
    potential_energy,
    sobolev_norm,
    xsb_norm,
)
from .datagen import (
    DataSpec,
    GaussianBump,
    PlaneWave,
    RoughRandom,
    ShellPacket,
    generate,
    spectral_slope,
)
from .experiments import (
    BilinearResult,
    FitResult,
    GrowthRecord,
    SweepResult,
    SweepRow,
    almost_conservation_sweep,
    bilinear_strichartz,
    fit_loglog,
    global_growth,
    lambda_for,
    local_norm_check,
    n_for,
    scaling_check,
)

__version__ = "0.1.0"
