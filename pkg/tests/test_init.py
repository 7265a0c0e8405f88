import numpy as np
import pytest
from hypothesis import given, settings

from nllmp import ProblemInstance, brute_force_solve, gaec, initial_solution, is_feasible
from nllmp.init import ContractionPool, fix_labels_independently
from nllmp.model import objective_of

from helpers import instances, path, two_node


def test_independent_labels():
    inst = path(3, num_labels=3, node_costs=np.array([[3.0, 1, 2], [4, 4, 4], [0, 0, 0]]))
    assert fix_labels_independently(inst).tolist() == [1, 0, 0]


def test_gaec_no_improving_merge_gives_singletons():
    inst = path(4, join=1.0, cut=1.0, lifted=[(0, 2)])
    assert gaec(inst, [0] * 4).tolist() == [0, 1, 2, 3]


def test_gaec_two_nodes_merge():
    inst = path(2, join=0.0, cut=5.0)
    assert gaec(inst, [0, 0]).tolist() == [0, 0]


def test_gaec_path_rewards():
    cut = np.array([5.0, -2.0]).reshape(2, 1, 1)
    inst = ProblemInstance(3, [(0, 1), (1, 2)], [(0, 1), (1, 2)], np.zeros((3, 1)),
                           np.zeros((2, 1, 1)), cut)
    assert gaec(inst, [0, 0, 0]).tolist() == [0, 0, 1]


def test_gaec_lifted_reward_alone_never_merges():
    # large reward on the lifted arc (0, 2) but none on base edges
    cut = np.array([0.0, 0.0, 9.0]).reshape(3, 1, 1)
    inst = ProblemInstance(3, [(0, 1), (1, 2)], [(0, 1), (1, 2), (0, 2)], np.zeros((3, 1)),
                           np.zeros((3, 1, 1)), cut)
    assert gaec(inst, [0, 0, 0]).tolist() == [0, 1, 2]


def test_gaec_lifted_reward_aggregates_after_merge():
    # after merging {0,1}, the pair ({0,1},{2}) has reward -1 + 9 from base and lifted arc
    cut = np.array([3.0, -1.0, 9.0]).reshape(3, 1, 1)
    inst = ProblemInstance(3, [(0, 1), (1, 2)], [(0, 1), (1, 2), (0, 2)], np.zeros((3, 1)),
                           np.zeros((3, 1, 1)), cut)
    assert gaec(inst, [0, 0, 0]).tolist() == [0, 0, 0]


def test_initial_solution_zero_costs():
    sol = initial_solution(path(3, num_labels=2))
    assert sol.labels.tolist() == [0, 0, 0]
    assert sol.components.tolist() == [0, 1, 2]
    assert sol.objective == 0 and sol.feasible


def test_initial_solution_two_node():
    inst = two_node()
    sol = initial_solution(inst)
    # row (1, 0) picks b for v, w ties to a; under (b, a) cutting pays 3, joining 0
    assert sol.labels.tolist() == [1, 0]
    assert sol.components.tolist() == [0, 0]
    assert sol.objective == 0 == objective_of(inst, [1, 0], [0, 0])


def test_initial_solution_methods():
    inst = path(3, num_labels=2)
    assert initial_solution(inst, "joined").components.tolist() == [0, 0, 0]
    assert initial_solution(inst, "singletons").components.tolist() == [0, 1, 2]
    with pytest.raises(ValueError):
        initial_solution(inst, "random")


@settings(max_examples=60, deadline=None)
@given(instances(max_nodes=10, max_labels=3))
def test_gaec_merges_strictly_improve_and_stay_feasible(inst):
    lab = fix_labels_independently(inst)
    pool = ContractionPool(inst, lab)
    prev = objective_of(inst, lab, np.arange(inst.num_nodes))
    for a, b, reward in pool.run():
        assert reward > 0
        comp = pool.components()
        assert is_feasible(inst, comp)
        now = objective_of(inst, lab, comp)
        assert now == prev - reward
        prev = now


@settings(max_examples=40, deadline=None)
@given(instances(max_nodes=7, max_labels=3))
def test_initial_solution_bounded_by_oracle(inst):
    sol = initial_solution(inst)
    assert sol.feasible
    assert sol.objective >= brute_force_solve(inst).objective
