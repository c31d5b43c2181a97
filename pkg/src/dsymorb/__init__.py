"""Doubly-symmetric periodic orbits of the restricted three-body problem
and Hill's lunar problem: Keplerian seeds, quarter-period shooting, and
Floquet stability from quarter-period data."""

from .dynamics import (CanonicalState, Model, State6, hamiltonian,
                       m2_frame_shift, m2_frame_unshift, reflect_syzygy,
                       reflect_vertical_plane, variational_matrix,
                       variational_rhs, vector_field)
from .integrator import (CrossingEvent, IntegratorConfig, VariationalBundle,
                         cubic_root_in_unit_interval, hermite_dense,
                         propagate_to_nth_crossing, propagate_to_time,
                         rkf78_step)
from .seeds import (CASES, CaseDescriptor, Regime, ResonanceParams, SeedSpec,
                    StartPlane, build_seed, case_from_label, enumerate_cases,
                    resonance_params, spec_from_cos2i)
from .shooting import (AxialProblem, ResidualVector, ShootingProblem,
                       axial_residual, closure_defect, fd_jacobian,
                       quarter_bundle, residual, solve_shooting)
from .solver import (BroydenState, SolverConfig, broyden_solve, line_search,
                     qr_rank_one_update)
from .stability import (Classification, MonodromyResult, classify,
                        eigenvalues_6x6, monodromy_from_quarter,
                        stability_index, symplectic_defect)
from .catalog import (CSV_HEADER, OrbitRecord, SweepSpec, read_catalog,
                      run_sweep, solve_axial_case, solve_case, sweep_summary,
                      trace_states, verify_record, write_catalog, write_trace)

__version__ = "0.1.0"
