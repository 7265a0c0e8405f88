"""Initial feasible solutions: independent labels, then greedy edge contraction."""
from __future__ import annotations

import heapq

import numpy as np

from .model import Solution, all_joined, canonical_components, singletons


def fix_labels_independently(instance):
    """Cheapest label of every node on its own; smallest label on ties."""
    return np.argmin(instance.node_costs, axis=1).astype(np.int64)


class ContractionPool:
    """Greedy additive edge contraction for a fixed labeling.

    The reward of merging two components is the sum, over all arcs between
    them, of ``cut - join`` at the fixed labels, i.e. the objective decrease
    of the merge.  Only pairs joined by a base edge may be merged.
    """

    def __init__(self, instance, labels):
        labels = np.asarray(labels, dtype=np.int64)
        n = instance.num_nodes
        self.parent = list(range(n))
        # per-component map: neighbor component -> [reward, base-adjacent]
        self.adj = [dict() for _ in range(n)]
        if instance.num_arcs:
            t, h = instance.arcs[:, 0], instance.arcs[:, 1]
            idx = np.arange(instance.num_arcs)
            reward = instance.cut_costs[idx, labels[t], labels[h]] \
                - instance.join_costs[idx, labels[t], labels[h]]
            for v, w, r, base in zip(t.tolist(), h.tolist(), reward.tolist(),
                                     instance.is_base.tolist()):
                self.adj[v][w] = self.adj[w][v] = [r, base]
        self._heap = []
        for v in range(n):
            for w, (r, base) in self.adj[v].items():
                if v < w:
                    self._push(v, w, r, base)

    def _push(self, a, b, reward, base):
        if base and reward > 0:
            heapq.heappush(self._heap, (-reward, min(a, b), max(a, b)))

    def find(self, v):
        parent = self.parent
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def _valid(self, reward, a, b):
        if self.parent[a] != a or self.parent[b] != b:
            return False
        entry = self.adj[a].get(b)
        return entry is not None and entry[1] and entry[0] == reward

    def contract_next(self):
        """Perform the best merge; return ``(a, b, reward)`` or None when none improves."""
        heap = self._heap
        while heap:
            neg, a, b = heapq.heappop(heap)
            if self._valid(-neg, a, b):
                break
        else:
            return None
        # merge the smaller neighbor map into the larger
        keep, gone = (a, b) if len(self.adj[a]) >= len(self.adj[b]) else (b, a)
        self.parent[gone] = keep
        ka, ga = self.adj[keep], self.adj[gone]
        del ka[gone]
        del ga[keep]
        for x, (r, base) in ga.items():
            ax = self.adj[x]
            del ax[gone]
            if x in ka:
                entry = ka[x]
                entry[0] += r
                entry[1] = entry[1] or base
            else:
                entry = ka[x] = [r, base]
            ax[keep] = entry
        ga.clear()
        for x, (r, base) in ka.items():
            self._push(keep, x, r, base)
        return a, b, -neg

    def run(self):
        """Yield merges until none strictly decreases the objective."""
        while True:
            merge = self.contract_next()
            if merge is None:
                return
            yield merge

    def components(self):
        return canonical_components([self.find(v) for v in range(len(self.parent))])


def gaec(instance, labels):
    """Greedy agglomerative edge contraction at fixed labels; always feasible."""
    pool = ContractionPool(instance, labels)
    for _ in pool.run():
        pass
    return pool.components()


INIT_METHODS = ("gaec", "singletons", "joined")


def initial_solution(instance, method="gaec"):
    """Independently cheapest labels with a GAEC, all-singletons or all-joined decomposition."""
    labels = fix_labels_independently(instance)
    if method == "gaec":
        components = gaec(instance, labels)
    elif method == "singletons":
        components = singletons(instance)
    elif method == "joined":
        components = all_joined(instance)
    else:
        raise ValueError(f"unknown initialization {method!r}; expected one of {INIT_METHODS}")
    return Solution.evaluate(instance, labels, components, algorithm=method)
