"""Node-labeling lifted multicut: joint graph decomposition and node labeling.

Local search solvers (alternating and joint Kernighan-Lin style moves with
relabeling), greedy initialization, exact reference enumeration for tiny
instances, reductions from special cases, and text file formats.
"""
from .estimator import NLLMPSolver
from .init import gaec, initial_solution
from .io import (ParseError, generate_random, parse_instance, parse_solution,
                 serialize_instance, serialize_solution)
from .local_search import (solve_icm, solve_klj_star_r, solve_kljr, update_labeling,
                           update_lifted_multicut, update_two_cut)
from .model import (InstanceError, ProblemInstance, Solution, is_feasible, objective_of,
                    repair)
from .oracle import OracleRefusal, brute_force_solve, check_lifted_inequalities

__version__ = "0.1.0"

__all__ = [
    "NLLMPSolver", "gaec", "initial_solution", "ParseError", "generate_random",
    "parse_instance", "parse_solution", "serialize_instance", "serialize_solution",
    "solve_icm", "solve_klj_star_r", "solve_kljr", "update_labeling",
    "update_lifted_multicut", "update_two_cut", "InstanceError", "ProblemInstance",
    "Solution", "is_feasible", "objective_of", "repair", "OracleRefusal",
    "brute_force_solve", "check_lifted_inequalities",
]
