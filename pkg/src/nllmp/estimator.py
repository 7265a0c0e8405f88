"""Estimator-style facade over the solvers."""
from __future__ import annotations

from sklearn.base import BaseEstimator

from .init import INIT_METHODS, initial_solution
from .local_search import solve_icm, solve_klj_star_r, solve_kljr
from .validation import check_instance

ALGORITHMS = ("kljr", "kljstarr", "icm", "gaec-only")


class NLLMPSolver(BaseEstimator):
    """Solve node-labeling lifted multicut instances.

    Parameters
    ----------
    algorithm : {"kljr", "kljstarr", "icm", "gaec-only"}
        Alternating search, joint search, relabeling only, or the
        initialization alone.
    init : {"gaec", "singletons", "joined"}
        Decomposition of the initial solution; its labels are the
        independently cheapest ones.
    time_limit : float, optional
        Wall-clock budget in seconds for the local search.
    max_iter : int, optional
        Cap on outer iterations of the local search.

    Attributes
    ----------
    labels_ : ndarray of shape (n_nodes,)
    components_ : ndarray of shape (n_nodes,)
        Component ids in order of first occurrence.
    objective_ : float
    initial_objective_ : float
    solution_ : Solution
    trace_ : SearchTrace or None
    """

    def __init__(self, algorithm="kljr", init="gaec", time_limit=None, max_iter=None):
        self.algorithm = algorithm
        self.init = init
        self.time_limit = time_limit
        self.max_iter = max_iter

    def _check_params(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.init not in INIT_METHODS:
            raise ValueError(f"init must be one of {INIT_METHODS}, got {self.init!r}")
        if self.time_limit is not None and not self.time_limit > 0:
            raise ValueError("time_limit must be positive")
        if self.max_iter is not None and (int(self.max_iter) != self.max_iter or self.max_iter < 1):
            raise ValueError("max_iter must be a positive integer")

    def fit(self, X, y=None):
        """Solve the instance ``X``; ``y`` is ignored."""
        self._check_params()
        instance = check_instance(X)
        initial = initial_solution(instance, self.init)
        trace = None
        if self.algorithm == "gaec-only":
            sol = initial
            sol.metadata.update(algorithm="gaec-only", iterations=0)
        elif self.algorithm == "icm":
            sol, trace = solve_icm(instance, initial)
        else:
            solve = solve_kljr if self.algorithm == "kljr" else solve_klj_star_r
            sol, trace = solve(instance, initial, time_limit=self.time_limit,
                               max_iter=self.max_iter)
        sol.metadata["init"] = self.init
        self.solution_ = sol
        self.trace_ = trace
        self.labels_ = sol.labels
        self.components_ = sol.components
        self.objective_ = sol.objective
        self.initial_objective_ = initial.objective
        return self

    def fit_predict(self, X, y=None):
        """Solve ``X`` and return ``(labels, components)``."""
        self.fit(X)
        return self.labels_, self.components_

    def score(self, X, y=None):
        """Negative objective of a fresh solve of ``X`` (higher is better)."""
        return -self.fit(X).objective_
