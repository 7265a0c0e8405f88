"""Exact reference solver and explicit constraint checks for tiny instances."""
from __future__ import annotations

import itertools

import networkx as nx
import numpy as np

from .model import Solution, cut_vector

MAX_PARTITION_NODES = 12
MAX_INEQUALITY_NODES = 10
MAX_STATES = 10 ** 7


class OracleRefusal(RuntimeError):
    """The instance exceeds a configured size guard."""


def _adjacency_masks(instance):
    masks = [0] * instance.num_nodes
    for v, w in instance.base_edges.tolist():
        masks[v] |= 1 << w
        masks[w] |= 1 << v
    return masks


def _connected(mask, adj):
    start = mask & -mask
    seen = frontier = start
    while frontier:
        nxt = 0
        while frontier:
            bit = frontier & -frontier
            frontier ^= bit
            nxt |= adj[bit.bit_length() - 1]
        frontier = nxt & mask & ~seen
        seen |= frontier
    return seen == mask


def enumerate_connected_partitions(instance, max_nodes=MAX_PARTITION_NODES):
    """Yield every partition of the nodes into connected blocks exactly once.

    Partitions are component labelings in restricted-growth form (the first
    node is in block 0, each new block gets the next index), in descending
    lexicographic order: all singletons first, one block last.
    """
    n = instance.num_nodes
    if n > max_nodes:
        raise OracleRefusal(f"{n} nodes exceed the partition guard of {max_nodes}")
    adj = _adjacency_masks(instance)
    rgs = [0] * n

    def rec(i, blocks, masks):
        if i == n:
            if all(_connected(m, adj) for m in masks):
                yield np.array(rgs, dtype=np.int64)
            return
        bit = 1 << i
        for b in range(blocks, -1, -1):
            rgs[i] = b
            if b == blocks:
                yield from rec(i + 1, blocks + 1, masks + [bit])
            else:
                saved = masks[b]
                masks[b] = saved | bit
                yield from rec(i + 1, blocks, masks)
                masks[b] = saved

    yield from rec(0, 0, [])


def _base_graph(instance):
    g = nx.Graph()
    g.add_nodes_from(range(instance.num_nodes))
    g.add_edges_from(map(tuple, instance.base_edges.tolist()))
    return g


def find_violated_inequality(instance, y, max_nodes=MAX_INEQUALITY_NODES):
    """Search the cycle, path and cut inequalities for one violated by ``y``.

    ``y`` is a 0/1 vector over ``instance.arcs`` (1 = cut).  Returns a
    human-readable witness, or None if all inequalities hold.
    """
    n = instance.num_nodes
    if n > max_nodes:
        raise OracleRefusal(f"{n} nodes exceed the inequality guard of {max_nodes}")
    y = np.asarray(y).astype(bool)
    value = {}
    for (v, w), yv in zip(instance.arcs.tolist(), y.tolist()):
        value[frozenset((v, w))] = yv
    g = _base_graph(instance)

    for cycle in nx.simple_cycles(g):
        if len(cycle) < 3:
            continue
        edges = [frozenset((cycle[i], cycle[(i + 1) % len(cycle)])) for i in range(len(cycle))]
        cut = [e for e in edges if value[e]]
        if len(cut) == 1:
            return f"cycle {cycle}: only edge {sorted(cut[0])} is cut"

    lifted = [(v, w) for (v, w), base in zip(instance.arcs.tolist(), instance.is_base.tolist())
              if not base]
    for v, w in lifted:
        if value[frozenset((v, w))]:
            for path in nx.all_simple_paths(g, v, w):
                if not any(value[frozenset(e)] for e in zip(path, path[1:])):
                    return f"path {path}: no edge cut but lifted edge ({v}, {w}) is cut"
        else:
            others = [u for u in range(n) if u not in (v, w)]
            for r in range(len(others) + 1):
                for extra in itertools.combinations(others, r):
                    side = {v, *extra}
                    boundary = [frozenset((a, b)) for a, b in g.edges if (a in side) != (b in side)]
                    if all(value[e] for e in boundary):
                        return (f"cut around {sorted(side)}: all edges cut but lifted edge "
                                f"({v}, {w}) is joined")
    return None


def check_cut_vector(instance, y, max_nodes=MAX_INEQUALITY_NODES):
    return find_violated_inequality(instance, y, max_nodes) is None


def check_lifted_inequalities(instance, components, max_nodes=MAX_INEQUALITY_NODES):
    """True iff the cut vector induced by ``components`` satisfies every inequality."""
    return check_cut_vector(instance, cut_vector(instance, components), max_nodes)


def count_states(instance, partitions=None):
    if partitions is None:
        partitions = sum(1 for _ in enumerate_connected_partitions(instance))
    return instance.num_labels ** instance.num_nodes * partitions


def _value_chunks(instance, max_states, chunk):
    """Yield ``(labelings, partitions, values)`` blocks covering every state.

    ``values[i, j]`` is the objective of labeling ``i`` with partition ``j``;
    labelings come in lexicographic order, partitions in enumeration order.
    """
    n, L = instance.num_nodes, instance.num_labels
    if L ** n > max_states:
        raise OracleRefusal(f"{L}^{n} labelings exceed the state budget {max_states}")
    parts = []
    for p in enumerate_connected_partitions(instance):
        parts.append(p)
        if len(parts) * L ** n > max_states:
            raise OracleRefusal(f"more than {max_states} states")
    parts = np.array(parts)

    labelings = np.array(list(itertools.product(range(L), repeat=n)), dtype=np.int64)
    base = instance.node_costs[np.arange(n), labelings].sum(axis=1)
    if instance.num_arcs:
        t, h = instance.arcs[:, 0], instance.arcs[:, 1]
        idx = np.arange(instance.num_arcs)
        lt, lh = labelings[:, t], labelings[:, h]
        join = instance.join_costs[idx, lt, lh]
        cut = instance.cut_costs[idx, lt, lh]
        base = base + join.sum(axis=1)
        diff = cut - join
        ys = (parts[:, t] != parts[:, h]).astype(float)
    step = max(1, chunk // max(1, len(parts)))
    for lo in range(0, len(labelings), step):
        hi = min(lo + step, len(labelings))
        if instance.num_arcs:
            vals = base[lo:hi, None] + diff[lo:hi] @ ys.T
        else:
            vals = np.repeat(base[lo:hi, None], len(parts), axis=1)
        yield labelings[lo:hi], parts, vals


def brute_force_solve(instance, max_states=MAX_STATES, chunk=1 << 22):
    """Global optimum by enumeration of labelings times connected partitions.

    Ties go to the lexicographically smallest labeling, then to the first
    partition in enumeration order.
    """
    best = None
    for labelings, parts, vals in _value_chunks(instance, max_states, chunk):
        k = int(np.argmin(vals))
        i, j = divmod(k, vals.shape[1])
        if best is None or vals[i, j] < best[0]:
            best = (vals[i, j], labelings[i], parts[j])
    _, labels, components = best
    return Solution.evaluate(instance, labels, components, algorithm="brute-force")


def optimal_states(instance, max_states=MAX_STATES, chunk=1 << 22):
    """Every optimal ``(labels, components)`` pair, components in restricted-growth form."""
    best = min(vals.min() for _, _, vals in _value_chunks(instance, max_states, chunk))
    out = []
    for labelings, parts, vals in _value_chunks(instance, max_states, chunk):
        for i, j in zip(*np.nonzero(vals == best)):
            out.append((labelings[i], parts[j]))
    return out
