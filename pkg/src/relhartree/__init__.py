"""Pseudo-spectral toolkit for the semi-relativistic Hartree equation

    i u_t = sqrt(-Lap + m^2) u + (lam exp(-mu|x|)/|x| * |u|^2) u

on a periodic box: operators and norms, the Hartree potential, ground states,
split-step evolution with blow-up monitoring, and external potentials.
"""
from .errors import (
    CollapseToZero,
    ConfigError,
    DegeneratePair,
    NoContraction,
    NoConvergence,
    NonPositiveEps,
    NonPositiveTime,
    NotFormBounded,
    RelhError,
    ResolutionLoss,
    SingularSymbol,
    UnresolvedScale,
    ZeroField,
)
from .evolution import (
    EnergyReport,
    IntegratorConfig,
    RunState,
    Status,
    apriori_bound_check,
    detect_blowup,
    evolve,
    measure,
    picard_duhamel,
    step_strang,
)
from .groundstate import (
    GroundState,
    energy_scaling_check,
    focusing_energy,
    load_ground_state,
    save_ground_state,
    k_functional,
    scale_ground_state,
    solve_ground_state,
)
from .hartree import HartreeResult, Params, hartree_potential, kato_ratio, lipschitz_witness, nonlinearity
from .potentials import PotentialSpec, estimate_form_bound, threshold_with_potential, x_norm
from .spectral import (
    Field,
    Grid,
    MultiplierSpec,
    Representation,
    apply_multiplier,
    inner,
    l2_norm,
    poisson_semigroup,
    regularize,
    resample,
    sobolev_norm,
    to_physical,
    to_spectral,
)

__version__ = "0.1.0"
