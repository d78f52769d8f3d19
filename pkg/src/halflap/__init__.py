"""Discrete half-space Dirichlet/Neumann Laplacians and norm-resolvent rate studies."""

from .calculus import (
    ResolventQuery,
    SpectralFunction,
    apply_psi,
    compare_zero_extension,
    derive_psi_params,
    resolve_continuum,
    resolve_continuum_halfspace,
    resolve_dirichlet,
    resolve_full,
    resolve_neumann,
    resolve_psi,
    resolve_with_potential,
)
from .errors import ConvergenceError, GridMismatchError, SpectralProximityError, ValidationError
from .experiments import ExperimentConfig, RateReport, emit_csv, emit_svg, fit_rate, load_config, run_case
from .genfunc import (
    GeneratingFunction,
    estimate_decay,
    make_meyer,
    make_shannon,
    validate_orthonormality,
    validate_support_and_lower_bound,
)
from .lattice import (
    ContinuumField,
    HalfLatticeGrid,
    LatticeField,
    LatticeGrid,
    ReferenceGrid,
    even_extend_continuum,
    even_extend_lattice,
    odd_extend_continuum,
    odd_extend_lattice,
    restrict_continuum,
    restrict_lattice,
    zero_extend_continuum,
)
from .normest import ErrorOperator, assemble_error, operator_norm, residual_certificate
from .operators import (
    DiscretePotential,
    PotentialSpec,
    StencilOperator,
    apply_stencil,
    continuum_symbol,
    even_extend_potential,
    lattice_symbol,
    psi_lattice_symbol,
    sample_potential,
)
from .transfer import TransferPlan, discretize, discretize_halfspace, embed, embed_halfspace

__version__ = "0.1.0"
