"""Nonlocal evolution with memory: Levy operators, semilinear elliptic and weighted parabolic solves,
and the Picard fixed point coupling them."""

from .grid import Grid, GridFunction, TimeGrid, inner_l2, l2_norm, norms
from .kernel import check_levy_admissible, eval_kernel, fractional, levy_mass, normalize, rescale
from .quadrature import QuadratureSpec
from .nonlocal_op import OperatorMatrix, assemble, bilinear, poincare_lower_bound
from .potential import Potential, evaluate, kappa, validate_assumption
from .elliptic import EllipticOptions, evaluate_J, solve_elliptic, verify_elliptic_estimates
from .parabolic import energy_check, max_principle_check, solve_parabolic, step, time_integral
from .memory_fixed_point import MemoryProblem, PicardOptions, pi_map, solve_memory, uniqueness_indicator

__version__ = "0.1.0"
