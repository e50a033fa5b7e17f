"""mlswe: entropy-stable solvers for multilayer shallow water equations.

Layers are indexed top to bottom; densities must increase downward.
The package provides a first-order finite volume scheme and a split-form
nodal DG scheme with subcell finite volume blending, both built on the
same well-balanced face flux with hydrostatic reconstruction.
"""

__version__ = "0.1.0"

from .config import ConfigError, RunConfig, load_config, parse_sweep_spec
from .dgsem import (
    FieldDG1,
    FieldDG2,
    GridDG1,
    build_grid_dg1,
    max_stable_dt_dg1,
    max_stable_dt_dg2,
    rhs_dg_1d,
    rhs_dg_2d,
    rhs_subcell_fv_1d,
    rhs_subcell_fv_2d,
)
from .diagnostics import DiagnosticsRecord, DomainQuad, GaugeSeries
from .driver import RunResult, SweepResult, compute_dt, run_scenario, run_sweep
from .equations import (
    DRY_FLOOR,
    EquationSpec,
    LayerState,
    ModelError,
    coupling_heights,
    entropy,
    entropy_flux,
    entropy_state,
    entropy_variables,
    nonconservative_factors,
    physical_flux,
    total_layer_heights,
)
from .fluxes import FluxResult, ec_flux, es_flux, lambda_max, nonconservative_diamond
from .fv import FieldFV, Grid1D, SolverError, max_stable_dt_fv, rhs_fv, wall_boundary
from .geometry import (
    Geometry2D,
    Mesh2D,
    MeshError,
    build_geometry,
    make_structured_mesh,
    read_mesh_text,
    sine_warp,
    write_mesh_text,
)
from .operators import LGLOperators, OperatorError, build_lgl
from .reconstruction import (
    InterfacePair,
    ReconstructedPair,
    reconstruct_bottom,
    reconstruct_state,
)
from .scenarios import Gauge, RunSetup, get_scenario, list_scenarios
from .stabilization import (
    Thresholds,
    finalize_alpha,
    positivity_limit,
    post_stage,
    shock_indicator,
)
from .timestepping import clamp_dt, ssprk43_step

__all__ = [
    "DRY_FLOOR",
    "ConfigError",
    "DiagnosticsRecord",
    "DomainQuad",
    "EquationSpec",
    "FieldDG1",
    "FieldDG2",
    "FieldFV",
    "FluxResult",
    "Gauge",
    "GaugeSeries",
    "Geometry2D",
    "Grid1D",
    "GridDG1",
    "InterfacePair",
    "LGLOperators",
    "LayerState",
    "Mesh2D",
    "MeshError",
    "ModelError",
    "OperatorError",
    "ReconstructedPair",
    "RunConfig",
    "RunResult",
    "RunSetup",
    "SolverError",
    "SweepResult",
    "Thresholds",
    "build_geometry",
    "build_grid_dg1",
    "build_lgl",
    "clamp_dt",
    "compute_dt",
    "coupling_heights",
    "ec_flux",
    "entropy",
    "entropy_flux",
    "entropy_state",
    "entropy_variables",
    "es_flux",
    "finalize_alpha",
    "get_scenario",
    "lambda_max",
    "list_scenarios",
    "load_config",
    "make_structured_mesh",
    "max_stable_dt_dg1",
    "max_stable_dt_dg2",
    "max_stable_dt_fv",
    "nonconservative_diamond",
    "nonconservative_factors",
    "parse_sweep_spec",
    "physical_flux",
    "positivity_limit",
    "post_stage",
    "read_mesh_text",
    "reconstruct_bottom",
    "reconstruct_state",
    "rhs_dg_1d",
    "rhs_dg_2d",
    "rhs_fv",
    "rhs_subcell_fv_1d",
    "rhs_subcell_fv_2d",
    "run_scenario",
    "run_sweep",
    "shock_indicator",
    "sine_warp",
    "ssprk43_step",
    "total_layer_heights",
    "wall_boundary",
    "write_mesh_text",
]
