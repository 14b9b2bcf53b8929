"""Green's functions and exact solutions for linear differential
equations with reflection, constant coefficients and two-point boundary
conditions."""

from ._backends import BACKEND
from .boundary import (BoundarySpec, DecomposedConditions, ExtendedBoundary,
                       build_xi, conditions_residual, decompose_conditions,
                       extend_conditions)
from .errors import (ComplexFactorizationSkipped, ConvergenceFailure,
                     DegenerateReduction, DergreenError, DimensionError,
                     NonUniqueBVP, NoRealFactorization, NotDecomposable,
                     OutOfDomain, ParseError)
from .exppoly import (BivariateExpPoly, Endpoint, ExpPoly, HalfPlane,
                      PiecewiseKernel, Region, ep_add, ep_antideriv_definite,
                      ep_diff, ep_mul, ep_reflect, kernel_eval)
from .factorization import (EvenPoly, Factorization,
                            descartes_no_negative_roots, factor_even,
                            factor_n2_closed_form, opposite_poly, roots)
from .greens import (BVProblem, GreenReport, compose_kernels, green_build,
                     green_verify, solve_with_kernel, transpose_kernel)
from .operators import (DiffPoly, ReflectionOperator, apply, apply_diffpoly,
                        apply_kernel, companion, compose, reduce_operator)
from .pipeline import (BenchReport, DERProblem, FactoredSystem,
                       SolutionBundle, adjoint_shortcut, bench, solve_der)
from .problemfile import ProblemFile, format_problem, parse_problem, parse_rhs

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "__version__",
    # errors
    "DergreenError", "OutOfDomain", "DegenerateReduction",
    "ConvergenceFailure", "NoRealFactorization", "NotDecomposable",
    "NonUniqueBVP", "ComplexFactorizationSkipped", "ParseError",
    "DimensionError",
    # function algebra
    "ExpPoly", "BivariateExpPoly", "Region", "HalfPlane", "PiecewiseKernel",
    "Endpoint", "ep_add", "ep_mul", "ep_diff", "ep_reflect",
    "ep_antideriv_definite", "kernel_eval",
    # operators
    "ReflectionOperator", "DiffPoly", "compose", "companion",
    "reduce_operator", "apply", "apply_diffpoly", "apply_kernel",
    # factorization
    "EvenPoly", "Factorization", "roots", "factor_even", "opposite_poly",
    "descartes_no_negative_roots", "factor_n2_closed_form",
    # boundary
    "BoundarySpec", "ExtendedBoundary", "DecomposedConditions",
    "extend_conditions", "build_xi", "decompose_conditions",
    "conditions_residual",
    # greens
    "BVProblem", "GreenReport", "green_build", "green_verify",
    "compose_kernels", "transpose_kernel", "solve_with_kernel",
    # pipeline
    "DERProblem", "FactoredSystem", "SolutionBundle", "solve_der",
    "adjoint_shortcut", "bench", "BenchReport",
    # problem files
    "ProblemFile", "parse_problem", "format_problem", "parse_rhs",
]
