"""Primitive-equations solver and verification harness on the periodic box
(0,1)^2 x (-h, 0): hydrostatic reformulation, exact per-mode semigroups,
mild-solution Picard iteration, exponential-Euler IMEX stepping, and the
energy/decay verification suites.
"""

from .grid import (Grid, HVectorField, PhysParams, ScalarField,
                   SurfaceScalarField)
from .norms import (anisotropic_norm, fractional_h_norm, integrate, lp_norm,
                    sobolev_norm)
from .spectral import (SpectrumField, dealias, hfft, horizontal_derivative,
                       ihfft, poisson2d_solve)
from .vertical import (VerticalOperator, build_vertical_operator,
                       vertical_derivative)
from .hydrostatic import (baroclinic_gradient, classify_initial_data,
                          helmholtz_project, reconstruct_pressure_gradient,
                          reconstruct_w, vertical_average)
from .dynamics import (SemigroupCache, apply_semigroup, assemble_F, assemble_G,
                       assemble_rhs, build_semigroup_cache, decay_rate,
                       nonlinearity_bound_probe, phi1_apply)
from .solver import (Caches, Forcing, State, Trajectory, estimate_Tstar,
                     imex_step, picard_solve, run_simulation)
from .diagnostics import DiagnosticsRecord, records_to_csv, write_csv
from .snapshots import read_snapshot, write_snapshot
from .config import ConfigError, RunConfig, load_config
from .harness import (convergence_study, decay_experiment, fit_decay_rate,
                      run_verify_suites, verify_energy_identity,
                      verify_gronwall_bounds)
from .cli import cli_main

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
