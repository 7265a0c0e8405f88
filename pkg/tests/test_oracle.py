import itertools
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings

from nllmp import ProblemInstance, brute_force_solve, objective_of
from nllmp.model import is_feasible, repair
from nllmp.oracle import (OracleRefusal, check_cut_vector, check_lifted_inequalities,
                          count_states, enumerate_connected_partitions,
                          find_violated_inequality, optimal_states)

from helpers import instances, path, two_node


def complete(n):
    pairs = list(itertools.combinations(range(n), 2))
    return ProblemInstance(n, pairs, pairs, np.zeros((n, 1)), np.zeros((len(pairs), 1, 1)),
                           np.zeros((len(pairs), 1, 1)))


def bell(n):
    b = [1]
    for k in range(n):
        b.append(sum(comb(k, i) * b[i] for i in range(k + 1)))
    return b[n]


def test_partition_counts_small():
    assert len(list(enumerate_connected_partitions(path(3)))) == 4
    assert len(list(enumerate_connected_partitions(complete(3)))) == 5
    assert len(list(enumerate_connected_partitions(path(1)))) == 1


@pytest.mark.parametrize("n", range(1, 7))
def test_partition_counts_closed_forms(n):
    assert len(list(enumerate_connected_partitions(path(n)))) == 2 ** (n - 1)
    assert len(list(enumerate_connected_partitions(complete(n)))) == bell(n)


@settings(max_examples=40, deadline=None)
@given(instances(max_nodes=7))
def test_partitions_are_exactly_the_feasible_canonical_labelings(inst):
    parts = [tuple(p) for p in enumerate_connected_partitions(inst)]
    assert len(parts) == len(set(parts))
    n = inst.num_nodes
    # every restricted-growth string that is feasible, and nothing else
    expected = set()
    for rgs in itertools.product(range(n), repeat=n):
        if rgs[0] == 0 and all(rgs[i] <= max(rgs[:i]) + 1 for i in range(1, n)):
            if is_feasible(inst, rgs):
                expected.add(rgs)
    assert set(parts) == expected


def test_partition_guard():
    with pytest.raises(OracleRefusal):
        list(enumerate_connected_partitions(path(13)))


def test_inequality_examples():
    inst = path(3, lifted=[(0, 2)])
    # arcs sorted: (0,1), (0,2), (1,2); lifted cut with no base edge cut
    assert not check_cut_vector(inst, [0, 1, 0])
    assert "path" in find_violated_inequality(inst, [0, 1, 0])
    # lifted joined while both base edges cut
    assert "cut around" in find_violated_inequality(inst, [1, 0, 1])
    tree = path(4)
    assert check_cut_vector(tree, [1, 1, 1])
    assert check_lifted_inequalities(inst, [0, 0, 0])


def test_cycle_inequality():
    tri = complete(3)
    # exactly one edge of the triangle cut
    assert "cycle" in find_violated_inequality(tri, [1, 0, 0])


def test_inequality_guard():
    with pytest.raises(OracleRefusal):
        check_lifted_inequalities(path(11), np.zeros(11, dtype=int))


def test_brute_force_zero_costs():
    sol = brute_force_solve(path(3, num_labels=2))
    assert sol.objective == 0
    assert sol.labels.tolist() == [0, 0, 0]
    assert sol.components.tolist() == [0, 1, 2]


def test_brute_force_two_node():
    inst = two_node()
    sol = brute_force_solve(inst)
    assert sol.objective == -1
    assert sol.labels.tolist() == [0, 0] and sol.components[0] == sol.components[1]
    assert count_states(inst) == 8
    # every one of the 8 states, by hand-style enumeration
    values = [objective_of(inst, lab, comp) for lab in itertools.product(range(2), repeat=2)
              for comp in ([0, 0], [0, 1])]
    assert min(values) == -1 and values.count(-1) == 1


def test_three_node_path_state_count():
    assert count_states(path(3, num_labels=2)) == 32


def test_state_budget():
    with pytest.raises(OracleRefusal):
        brute_force_solve(path(8, num_labels=3), max_states=1000)


@settings(max_examples=30, deadline=None)
@given(instances(max_nodes=6, max_labels=3))
def test_brute_force_beats_random_feasible_states(inst):
    best = brute_force_solve(inst)
    assert best.feasible
    rng = np.random.default_rng(0)
    n, L = inst.num_nodes, inst.num_labels
    for _ in range(1000):
        lab = rng.integers(L, size=n)
        comp = repair(inst, rng.integers(n, size=n))
        assert best.objective <= objective_of(inst, lab, comp)


@settings(max_examples=20, deadline=None)
@given(instances(max_nodes=5, max_labels=2))
def test_optimal_states_agree_with_brute_force(inst):
    best = brute_force_solve(inst)
    opts = optimal_states(inst)
    assert opts
    for lab, comp in opts:
        assert objective_of(inst, lab, comp) == best.objective
        assert is_feasible(inst, comp)
    assert any(np.array_equal(lab, best.labels) and np.array_equal(comp, best.components)
               for lab, comp in opts)
