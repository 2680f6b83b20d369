"""Finite-difference solver for the non-local parabolic bubble problem.

``min(u_t + Mu, u(t,x) - u(t,-x) - psi(t,x)) = 0`` is solved by a monotone
sequence of parabolic obstacle problems; the stationary closed form serves
as a validation oracle.
"""

__version__ = "0.1.0"

from .grid import Field, Grid, make_grid, read_field_csv, reflect, sample, write_field_csv
from .iteration import (BubbleProblem, IterationReport, MonotonicityError, extract_contact_set,
                        fixed_point_residual, iterate, stationary_boundary, stationary_q_boundary)
from .lcp import LCPError, LCPInstance, LCPOptions, solve_brennan_schwartz, solve_bruteforce, solve_lcp, solve_psor
from .obstacle import BoundaryData, CompatibilityError, ObstacleSolveError, solve_obstacle, solve_unconstrained
from .operator import (StabilityError, SymmetricCoefficients, TridiagonalSystem, apply_Lh, assemble_step_matrix,
                       check_stability)
from .stationary import StationaryModel, cubic_root, free_boundary_k, q_exact, u_exact_example
from .validation import ErrorReport, OrderStudy, error_at_time, order_study
