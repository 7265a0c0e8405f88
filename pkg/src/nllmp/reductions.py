"""Instances built from special cases and applications.

The builders in this module map

* unconstrained integer quadratic programs (``from_uiqp``),
* lifted multicut problems (``from_lmp``),
* multi-person pose estimation (``from_pose``) and
* tracking with detection suppression (``from_tracking``)

to node-labeling lifted multicut instances, and add subgraph-selection and
(dis-)connectedness costs to existing instances.

Infinite costs are replaced by a finite dominating constant: one more than
the sum of the absolute values of all finite costs of the instance.  In the
pose and tracking formulations a pair variable equal to 1 means *join*;
here, as everywhere in this package, a cut indicator of 1 means *cut*.  The
inversion happens inside the builders only.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from .model import ProblemInstance, cut_vector


class DominationWarning(UserWarning):
    """A constant meant to dominate all other costs does not."""


def dominating_cost(*costs):
    """One more than the sum of absolute values of all finite entries."""
    total = 0.0
    for c in costs:
        c = np.asarray(c, dtype=float)
        total += np.abs(c[np.isfinite(c)]).sum()
    return float(total) + 1.0


@dataclass
class UiqpSpec:
    num_nodes: int
    arcs: list
    node_costs: np.ndarray  # (n, L)
    pair_costs: np.ndarray  # (|A|, L, L)


@dataclass
class LmpSpec:
    num_nodes: int
    base_edges: list
    lifted_edges: list
    edge_costs: np.ndarray  # base edges first, then lifted edges


@dataclass
class PoseSpec:
    """Detections, joint classes, unary and pairwise costs.

    ``pairwise[p, c, c2]`` is the cost of joining the ``p``-th detection pair
    ``(d, d2)`` of ``itertools.combinations(range(num_detections), 2)`` with
    ``d`` of class ``c`` and ``d2`` of class ``c2``.
    """

    num_detections: int
    num_classes: int
    unary: np.ndarray  # (D, C)
    pairwise: np.ndarray  # (D * (D - 1) / 2, C, C)


@dataclass
class TrackingSpec:
    num_nodes: int
    edges: list
    unary: np.ndarray  # (V,)
    pairwise: np.ndarray  # (E,)


def _connecting_pairs(n, pairs):
    """Extra node pairs that make the graph on ``pairs`` connected."""
    for v, w in pairs:
        if not (0 <= v < n and 0 <= w < n) or v == w:
            raise ValueError(f"invalid node pair ({v}, {w}) for {n} nodes")
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for v, w in pairs:
        parent[find(v)] = find(w)
    first = {}
    for v in range(n):
        first.setdefault(find(v), v)
    roots = sorted(first.values())
    return [(roots[0], r) for r in roots[1:]]


def from_uiqp(spec):
    """Instance with ``G = G'`` and join costs equal to cut costs.

    Disconnected cost graphs are connected by zero-cost arcs.
    """
    n = spec.num_nodes
    node_costs = np.asarray(spec.node_costs, dtype=float)
    L = node_costs.shape[1]
    arcs = [tuple(map(int, a)) for a in spec.arcs]
    pair = np.asarray(spec.pair_costs, dtype=float).reshape(len(arcs), L, L)
    extra = _connecting_pairs(n, arcs)
    arcs = arcs + extra
    pair = np.concatenate([pair, np.zeros((len(extra), L, L))])
    return ProblemInstance(n, arcs, arcs, node_costs, pair, pair)


def uiqp_objective(spec, labels):
    labels = np.asarray(labels)
    total = float(np.asarray(spec.node_costs, dtype=float)[np.arange(spec.num_nodes), labels].sum())
    for (v, w), c in zip(spec.arcs, np.asarray(spec.pair_costs, dtype=float)):
        total += c[labels[v], labels[w]]
    return total


def from_lmp(spec):
    """Single-label instance whose cut costs are the edge costs."""
    edges = [tuple(map(int, e)) for e in spec.base_edges]
    lifted = [tuple(map(int, e)) for e in spec.lifted_edges]
    arcs = edges + lifted
    costs = np.asarray(spec.edge_costs, dtype=float).reshape(len(arcs))
    zeros = np.zeros((len(arcs), 1, 1))
    return ProblemInstance(spec.num_nodes, edges, arcs, np.zeros((spec.num_nodes, 1)),
                           zeros, costs.reshape(-1, 1, 1))


def lmp_objective(spec, components):
    components = np.asarray(components)
    edges = list(spec.base_edges) + list(spec.lifted_edges)
    return float(sum(c for (v, w), c in zip(edges, np.asarray(spec.edge_costs, dtype=float))
                     if components[v] != components[w]))


def apply_subgraph_selection(instance, epsilon_label, c_star, c_dagger=0.0):
    """Make ``epsilon_label`` mark inactive nodes.

    On every arc, joining an inactive with an active node costs ``c_star``,
    cutting them costs 0, and joining two inactive nodes costs ``c_dagger``.
    Warns with ``DominationWarning`` if ``c_star`` does not exceed the sum of
    absolute values of all other costs.
    """
    L = instance.num_labels
    eps = int(epsilon_label)
    if not 0 <= eps < L:
        raise ValueError(f"epsilon label {eps} out of range")
    join = np.array(instance.join_costs)
    cut = np.array(instance.cut_costs)
    mixed = np.zeros((L, L), dtype=bool)
    mixed[eps, :] = mixed[:, eps] = True
    mixed[eps, eps] = False
    join[:, mixed] = c_star
    cut[:, mixed] = 0.0
    join[:, eps, eps] = c_dagger
    rest = np.ones((L, L), dtype=bool)
    rest[eps, :] = rest[:, eps] = False
    bound = dominating_cost(instance.node_costs, join[:, rest], cut)
    if c_star < bound:
        warnings.warn(f"c_star={c_star} does not dominate the other costs (needs >= {bound})",
                      DominationWarning, stacklevel=2)
    return ProblemInstance(instance.num_nodes, instance.base_edges, instance.arcs,
                           instance.node_costs, join, cut)


def _with_arc(instance, v, w):
    """Copy of the cost tensors with arc (min, max) added if the pair has no arc."""
    if v == w:
        raise ValueError("v and w must be distinct")
    n, L = instance.num_nodes, instance.num_labels
    if not (0 <= v < n and 0 <= w < n):
        raise ValueError("node out of range")
    arcs = [tuple(a) for a in instance.arcs.tolist()]
    join = np.array(instance.join_costs)
    cut = np.array(instance.cut_costs)
    for i, a in enumerate(arcs):
        if set(a) == {v, w}:
            return arcs, join, cut, i
    arcs.append((min(v, w), max(v, w)))
    join = np.concatenate([join, np.zeros((1, L, L))])
    cut = np.concatenate([cut, np.zeros((1, L, L))])
    return arcs, join, cut, len(arcs) - 1


def _link(instance, v, w, l, l2, c_star, which):
    arcs, join, cut, i = _with_arc(instance, int(v), int(w))
    target = cut if which == "must" else join
    target[i, l, l2] = target[i, l2, l] = c_star
    return ProblemInstance(instance.num_nodes, instance.base_edges, arcs,
                           instance.node_costs, join, cut)


def add_must_link(instance, v, w, l, l2, c_star):
    """Penalize cutting ``v``, ``w`` when labeled ``(l, l2)`` or ``(l2, l)``."""
    return _link(instance, v, w, l, l2, c_star, "must")


def add_cannot_link(instance, v, w, l, l2, c_star):
    """Penalize joining ``v``, ``w`` when labeled ``(l, l2)`` or ``(l2, l)``."""
    return _link(instance, v, w, l, l2, c_star, "cannot")


def pose_inactive_label(spec):
    """Label index of the inactive label in ``from_pose`` instances."""
    return spec.num_classes


def from_pose(spec):
    """Complete graph on the detections with labels ``0..C-1`` and inactive label ``C``.

    Node costs are ``unary`` for classes and 0 for inactive; join costs are
    ``pairwise`` between classes, 0 between a class and inactive, and a
    dominating constant between two inactive nodes; cut costs are 0.
    """
    D, C = spec.num_detections, spec.num_classes
    unary = np.asarray(spec.unary, dtype=float).reshape(D, C)
    pairs = list(itertools.combinations(range(D), 2))
    pairwise = np.asarray(spec.pairwise, dtype=float).reshape(len(pairs), C, C)
    big = dominating_cost(unary, pairwise)
    node_costs = np.concatenate([unary, np.zeros((D, 1))], axis=1)
    join = np.zeros((len(pairs), C + 1, C + 1))
    join[:, :C, :C] = pairwise
    join[:, C, C] = big
    return ProblemInstance(D, pairs, pairs, node_costs, join, np.zeros_like(join))


TRACKING_INACTIVE = 0
TRACKING_ACTIVE = 1


def from_tracking(spec):
    """Two-label instance on the detection graph: label 0 inactive, 1 active.

    Node costs are ``unary`` when active; join costs are ``pairwise`` between
    active nodes, 0 for mixed pairs and a dominating constant between
    inactive nodes; cut costs are 0.  A disconnected detection graph is
    connected by extra edges with zero pairwise cost.
    """
    n = spec.num_nodes
    edges = [tuple(map(int, e)) for e in spec.edges]
    unary = np.asarray(spec.unary, dtype=float).reshape(n)
    pairwise = np.asarray(spec.pairwise, dtype=float).reshape(len(edges))
    big = dominating_cost(unary, pairwise)
    extra = _connecting_pairs(n, edges)
    edges = edges + extra
    pairwise = np.concatenate([pairwise, np.zeros(len(extra))])
    node_costs = np.stack([np.zeros(n), unary], axis=1)
    join = np.zeros((len(edges), 2, 2))
    join[:, TRACKING_ACTIVE, TRACKING_ACTIVE] = pairwise
    join[:, TRACKING_INACTIVE, TRACKING_INACTIVE] = big
    return ProblemInstance(n, edges, edges, node_costs, join, np.zeros_like(join))


def pays_dominating_cost(instance, labels, components, c_star):
    """True if some arc of the state is charged at least ``c_star``."""
    labels = np.asarray(labels)
    y = cut_vector(instance, components)
    t, h = instance.arcs[:, 0], instance.arcs[:, 1]
    idx = np.arange(instance.num_arcs)
    charged = np.where(y, instance.cut_costs[idx, labels[t], labels[h]],
                       instance.join_costs[idx, labels[t], labels[h]])
    return bool(np.any(charged >= c_star))
