"""Problem instances, labeling encodings, objective and feasibility.

A node labeling is an integer array ``labels`` of length ``num_nodes`` with
entries in ``range(num_labels)``.  A component labeling is an integer array
``components`` of the same length; two nodes are in the same component iff
their entries are equal.  Arcs carry a ``(num_labels, num_labels)`` matrix of
join costs and one of cut costs, indexed by ``[label of tail, label of head]``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class InstanceError(ValueError):
    """Raised when a problem instance is malformed."""


class ProblemInstance:
    """An instance of the node-labeling lifted multicut problem.

    Parameters
    ----------
    num_nodes : int
        Nodes are ``0, ..., num_nodes - 1``.
    base_edges : iterable of (int, int)
        Unordered edges of the graph whose decompositions are sought.  The
        graph must be connected.
    arcs : iterable of (int, int)
        Oriented edges of the cost graph.  Every base edge must occur here in
        exactly one orientation.
    node_costs : array_like, shape (num_nodes, num_labels)
    join_costs, cut_costs : array_like, shape (num_arcs, num_labels, num_labels)
        Costs paid on an arc when its endpoints share / do not share a
        component, indexed by the labels of tail and head.

    Arcs are stored sorted by ``(min(v, w), max(v, w))`` with the cost
    tensors permuted alongside, so two instances describing the same problem
    compare equal.
    """

    def __init__(self, num_nodes, base_edges, arcs, node_costs, join_costs, cut_costs):
        n = int(num_nodes)
        if n < 1:
            raise InstanceError("an instance needs at least one node")
        node_costs = np.array(node_costs, dtype=float)
        if node_costs.ndim != 2 or node_costs.shape[0] != n or node_costs.shape[1] < 1:
            raise InstanceError(
                f"node_costs must have shape ({n}, num_labels), got {node_costs.shape}")
        num_labels = node_costs.shape[1]

        arcs = np.array(list(arcs), dtype=np.int64).reshape(-1, 2)
        m = len(arcs)
        join_costs = _cost_tensor(join_costs, m, num_labels, "join_costs")
        cut_costs = _cost_tensor(cut_costs, m, num_labels, "cut_costs")
        if join_costs.shape != (m, num_labels, num_labels):
            raise InstanceError(f"join_costs must have shape ({m}, {num_labels}, {num_labels})")
        if cut_costs.shape != (m, num_labels, num_labels):
            raise InstanceError(f"cut_costs must have shape ({m}, {num_labels}, {num_labels})")
        if m and (arcs.min() < 0 or arcs.max() >= n):
            raise InstanceError("arc endpoint out of range")
        if np.any(arcs[:, 0] == arcs[:, 1]):
            raise InstanceError("self-loops are not allowed")

        keys = {}
        for i, (v, w) in enumerate(arcs.tolist()):
            key = (min(v, w), max(v, w))
            if key in keys:
                j = keys[key]
                if tuple(arcs[j]) == (v, w):
                    raise InstanceError(f"duplicate arc ({v}, {w})")
                raise InstanceError(f"arc ({v}, {w}) is present in both orientations")
            keys[key] = i

        edges = set()
        for v, w in base_edges:
            v, w = int(v), int(w)
            if not (0 <= v < n and 0 <= w < n):
                raise InstanceError(f"base edge ({v}, {w}) out of range")
            if v == w:
                raise InstanceError("self-loops are not allowed")
            key = (min(v, w), max(v, w))
            if key in edges:
                raise InstanceError(f"duplicate base edge {key}")
            if key not in keys:
                raise InstanceError(f"base edge {key} has no arc")
            edges.add(key)

        order = sorted(range(m), key=lambda i: (min(arcs[i]), max(arcs[i])))
        order = np.array(order, dtype=np.int64)
        self.num_nodes = n
        self.num_labels = num_labels
        self.arcs = arcs[order] if m else arcs
        self.node_costs = node_costs
        self.join_costs = join_costs[order] if m else join_costs
        self.cut_costs = cut_costs[order] if m else cut_costs
        self.base_edges = np.array(sorted(edges), dtype=np.int64).reshape(-1, 2)
        self.is_base = np.array(
            [(min(v, w), max(v, w)) in edges for v, w in self.arcs.tolist()], dtype=bool)
        for a in (self.arcs, self.node_costs, self.join_costs, self.cut_costs,
                  self.base_edges, self.is_base):
            a.setflags(write=False)

        if _count_components(n, self.base_edges) != 1:
            raise InstanceError("the base graph is not connected")

    @property
    def num_arcs(self):
        return len(self.arcs)

    def __eq__(self, other):
        if not isinstance(other, ProblemInstance):
            return NotImplemented
        return (self.num_nodes == other.num_nodes
                and self.num_labels == other.num_labels
                and np.array_equal(self.arcs, other.arcs)
                and np.array_equal(self.base_edges, other.base_edges)
                and np.array_equal(self.node_costs, other.node_costs)
                and np.array_equal(self.join_costs, other.join_costs)
                and np.array_equal(self.cut_costs, other.cut_costs))

    __hash__ = None

    def __repr__(self):
        return (f"ProblemInstance(num_nodes={self.num_nodes}, num_labels={self.num_labels}, "
                f"base_edges={len(self.base_edges)}, arcs={self.num_arcs})")

    # Adjacency structures used by the local search.  Each arc contributes
    # one incidence per endpoint; the incidence cost matrices are oriented so
    # that the first axis is the label of the owning node.

    @cached_property
    def incidence(self):
        return _Incidence(self)

    @cached_property
    def base_adjacency(self):
        n = self.num_nodes
        e = self.base_edges
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        order = np.lexsort((dst, src))
        ptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(ptr, src + 1, 1)
        return np.cumsum(ptr), dst[order]


class _Incidence:
    def __init__(self, instance):
        n = instance.num_nodes
        arcs = instance.arcs
        m = len(arcs)
        owner = np.concatenate([arcs[:, 0], arcs[:, 1]])
        nbr = np.concatenate([arcs[:, 1], arcs[:, 0]])
        arc = np.concatenate([np.arange(m), np.arange(m)])
        is_tail = np.concatenate([np.ones(m, bool), np.zeros(m, bool)])
        order = np.lexsort((nbr, owner))
        self.owner = owner[order]
        self.nbr = nbr[order]
        self.arc = arc[order]
        self.is_tail = is_tail[order]
        ptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(ptr, self.owner + 1, 1)
        self.ptr = np.cumsum(ptr)
        # costs[k, 0] are cut costs, costs[k, 1] join costs, so that
        # ``costs[k, same]`` selects by the same-component indicator
        costs = np.stack([instance.cut_costs[self.arc], instance.join_costs[self.arc]], axis=1)
        heads = ~self.is_tail
        costs[heads] = costs[heads].transpose(0, 1, 3, 2)
        self.costs = costs
        self.cut = costs[:, 0]
        self.join = costs[:, 1]

    def gather(self, nodes):
        """Incidence ids of ``nodes`` and the position of each owner in ``nodes``."""
        starts = self.ptr[nodes]
        lens = self.ptr[nodes + 1] - starts
        total = int(lens.sum())
        pos = np.repeat(np.arange(len(nodes)), lens)
        offsets = np.arange(total) - np.repeat(np.cumsum(lens) - lens, lens)
        return np.repeat(starts, lens) + offsets, pos


def _cost_tensor(costs, m, L, name):
    costs = np.array(costs, dtype=float)
    if not m and costs.size == 0:
        return np.zeros((0, L, L))
    if costs.size != m * L * L:
        raise InstanceError(f"{name} must have shape ({m}, {L}, {L}), got {costs.shape}")
    return costs.reshape(m, L, L)


def _count_components(n, edges):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    count = n
    for v, w in edges.tolist():
        rv, rw = find(v), find(w)
        if rv != rw:
            parent[rv] = rw
            count -= 1
    return count


@dataclass
class Solution:
    """A labeling and a decomposition with their objective value."""

    labels: np.ndarray
    components: np.ndarray
    objective: float
    feasible: bool
    metadata: dict = field(default_factory=dict)

    @classmethod
    def evaluate(cls, instance, labels, components, **metadata):
        labels = _as_labels(instance, labels)
        components = _as_components(instance, components)
        return cls(labels, components, objective_of(instance, labels, components),
                   is_feasible(instance, components), dict(metadata))


def _as_labels(instance, labels):
    labels = np.asarray(labels)
    if labels.shape != (instance.num_nodes,):
        raise ValueError(
            f"labeling must have length {instance.num_nodes}, got shape {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= instance.num_labels):
        raise ValueError("label out of range")
    return labels.astype(np.int64)


def _as_components(instance, components):
    components = np.asarray(components)
    if components.shape != (instance.num_nodes,):
        raise ValueError(
            f"component labeling must have length {instance.num_nodes}, "
            f"got shape {components.shape}")
    return components.astype(np.int64)


def cut_vector(instance, components):
    """``y`` over the arcs: True where the endpoints are in distinct components."""
    components = _as_components(instance, components)
    return components[instance.arcs[:, 0]] != components[instance.arcs[:, 1]]


def objective_of(instance, labels, components):
    """Objective value of a labeling and a component labeling.

    Defined for every component labeling, feasible or not.
    """
    labels = _as_labels(instance, labels)
    components = _as_components(instance, components)
    total = instance.node_costs[np.arange(instance.num_nodes), labels].sum()
    if instance.num_arcs:
        t, h = instance.arcs[:, 0], instance.arcs[:, 1]
        idx = np.arange(instance.num_arcs)
        lt, lh = labels[t], labels[h]
        same = components[t] == components[h]
        total += np.where(same, instance.join_costs[idx, lt, lh],
                          instance.cut_costs[idx, lt, lh]).sum()
    return float(total)


def is_feasible(instance, components):
    """True iff every component induces a connected subgraph of the base graph."""
    components = _as_components(instance, components)
    return len(np.unique(components)) == len(np.unique(repair(instance, components)))


def repair(instance, components):
    """Split every component into its connected pieces.

    Pieces are numbered 0, 1, 2, ... in order of discovery by a breadth-first
    search started from the nodes in ascending order.
    """
    components = _as_components(instance, components)
    ptr, nbr = instance.base_adjacency
    n = instance.num_nodes
    out = np.full(n, -1, dtype=np.int64)
    nxt = 0
    for s in range(n):
        if out[s] >= 0:
            continue
        out[s] = nxt
        m = components[s]
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w in nbr[ptr[v]:ptr[v + 1]].tolist():
                if out[w] < 0 and components[w] == m:
                    out[w] = nxt
                    queue.append(w)
        nxt += 1
    return out


def canonical_components(components):
    """Renumber components 0, 1, ... in order of first occurrence."""
    components = np.asarray(components)
    _, first, inverse = np.unique(components, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inverse.reshape(-1)]


def same_partition(a, b):
    return np.array_equal(canonical_components(a), canonical_components(b))


def relabel_node(labels, v, label, num_labels=None):
    """Copy of ``labels`` with node ``v`` relabeled to ``label``."""
    labels = np.array(labels, dtype=np.int64)
    if not 0 <= v < len(labels):
        raise ValueError(f"node {v} out of range")
    if label < 0 or (num_labels is not None and label >= num_labels):
        raise ValueError(f"label {label} out of range")
    labels[v] = label
    return labels


def move_node(components, v, m):
    """Copy of ``components`` with node ``v`` moved to component ``m``.

    The result may be infeasible when ``v`` is an articulation node.
    """
    components = np.array(components, dtype=np.int64)
    if not 0 <= v < len(components):
        raise ValueError(f"node {v} out of range")
    components[v] = m
    return components


def join_components(components, m, m2):
    """Copy of ``components`` with every node of component ``m`` put into ``m2``."""
    components = np.array(components, dtype=np.int64)
    components[components == m] = m2
    return components


def singletons(instance):
    return np.arange(instance.num_nodes, dtype=np.int64)


def all_joined(instance):
    return np.zeros(instance.num_nodes, dtype=np.int64)
