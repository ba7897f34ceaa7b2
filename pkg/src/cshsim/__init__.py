"""Pseudo-spectral simulator for a gauged nonlinear wave system on the
periodic 2-torus, with a dyadic frequency-analysis toolkit and an empirical
inequality-verification harness."""

from .config import RunConfig, load_config
from .diagnostics import (CSV_COLUMNS, DiagnosticsRow, apriori_monitor,
                          charge, charge_identity_residual, compute_rows,
                          constraint_residuals, energy, write_diagnostics_csv)
from .errors import (AlphaUnset, BandOutOfRange, ConfigError, CshError,
                     EmptyTrajectory, GridMismatch, InadmissibleParameters,
                     IndexOutOfRange, NonFinite, NotFound, PicardDivergence,
                     SingularSymbol, SnapshotFormatError)
from .estimates import (EstimateCase, EstimateReport, default_cases,
                        get_entry, list_estimates, run_estimate)
from .grid import (GridSpec, ScalarField, Symbol, apply_multiplier, dealias,
                   grad_abs_power, inv_laplacian, multiply_dealiased,
                   partial_deriv, riesz)
from .integrator import (QUAD_MIDPOINT, QUAD_TRAPEZOID, SCHEME_RK4,
                         SCHEME_TWISTED, StepConfig, evolve, half_wave, step)
from .lp import (CubeCover, band_decompose, band_range, cube_cover,
                 lp_project, lp_project_leq, square_function_sq,
                 trichotomy_split)
from .model import (CshState, PotentialSpec, Trajectory, coulomb_initial_data,
                    fourier_modes, gauge_transform, gaussian_bump, make_state,
                    null_form_pair, self_dual_potential,
                    solve_a0, solve_spatial_potentials, vortex_like,
                    zero_state)
from .norms import (History, TrajectoryNormReport, s0k_norm, s_gamma_norm,
                    s_gamma_value, sobolev_norm, spatial_lp, time_quad)
from .snapshot import read_snapshot, write_snapshot

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
