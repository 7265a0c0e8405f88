"""Kernighan-Lin style local search over labelings and decompositions.

``update_labeling`` greedily relabels single nodes.  ``update_two_cut``
builds a greedy sequence of node moves between two components (optionally
relabeling each moved node) and executes its best prefix, or joins the two
components.  ``update_lifted_multicut`` sweeps ``update_two_cut`` over the
decomposition.  The drivers ``solve_kljr`` (alternating) and
``solve_klj_star_r`` (joint) compose them.

All cost differences are maintained incrementally; with integer-valued costs
every cached difference is exact.
"""
from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

import numpy as np

from .model import (Solution, canonical_components, is_feasible, objective_of,
                    repair)


class DeltaCache:
    """Relabeling cost differences for a fixed decomposition.

    ``deltas[v, l]`` is the change of the objective when node ``v`` is
    relabeled ``l``.  The best move is found through a heap with lazy
    deletion: an entry is stale when the node's version has moved on.
    """

    def __init__(self, instance, labels, components):
        self.instance = instance
        self.labels = np.array(labels, dtype=np.int64)
        self.components = np.asarray(components, dtype=np.int64)
        n = instance.num_nodes
        self.deltas = self._rows(np.arange(n))
        self.version = np.zeros(n, dtype=np.int64)
        self._heap = []
        for v in range(n):
            self._push(v)

    def _rows(self, nodes):
        inst = self.instance
        inc = inst.incidence
        lab, comp = self.labels, self.components
        rows = inst.node_costs[nodes].copy()
        ks, pos = inc.gather(nodes)
        if len(ks):
            w = inc.nbr[ks]
            lw = lab[w]
            same = (comp[nodes][pos] == comp[w]).view(np.int8)
            np.add.at(rows, pos, inc.costs[ks, same, :, lw])
        return rows - rows[np.arange(len(nodes)), lab[nodes]][:, None]

    def _push(self, v):
        row = self.deltas[v]
        l = int(np.argmin(row))
        heapq.heappush(self._heap, (row[l], v, l, self.version[v]))

    def best(self):
        """``(delta, v, l)`` of the best relabel, smallest node then label on ties."""
        heap = self._heap
        while heap:
            d, v, l, ver = heap[0]
            if ver == self.version[v]:
                return d, v, l
            heapq.heappop(heap)
        return None

    def apply(self, v, label):
        """Relabel ``v`` and update the differences of ``v`` and its neighbors."""
        inc = self.instance.incidence
        lab, comp = self.labels, self.components
        old = lab[v]
        if label != old:
            ks = np.arange(inc.ptr[v], inc.ptr[v + 1])
            if len(ks):
                w = inc.nbr[ks]
                lw = lab[w]
                same = (comp[w] == comp[v]).view(np.int8)
                idx = np.arange(len(ks))
                before = inc.costs[ks, same, old, :]
                after = inc.costs[ks, same, label, :]
                self.deltas[w] += (after - after[idx, lw][:, None]) \
                    - (before - before[idx, lw][:, None])
                self.version[w] += 1
                for u in w.tolist():
                    self._push(u)
            self.deltas[v] -= self.deltas[v, label]
            lab[v] = label
        self.version[v] += 1
        self._push(v)


def update_labeling(instance, components, labels, observer=None):
    """Greedy single-node relabeling for a fixed decomposition.

    Applies the best relabel while it strictly decreases the objective.

    Returns
    -------
    delta : float
        Total change of the objective (<= 0).
    labels : ndarray
        The new labeling.
    """
    cache = DeltaCache(instance, labels, components)
    total = 0.0
    while True:
        if observer is not None:
            observer("relabel", cache.labels, cache.components, np.arange(instance.num_nodes),
                     None, cache.deltas)
        best = cache.best()
        if best is None or not best[0] < 0:
            return total, cache.labels
        d, v, l = best
        cache.apply(v, l)
        total += d


@dataclass
class TwoCutResult:
    delta: float
    components: np.ndarray
    labels: np.ndarray
    kind: str  # "none", "moves" or "join"
    moves: int = 0


def _two_cut(instance, components, labels, m, m2, joint, observer=None):
    n = instance.num_nodes
    inc = instance.incidence
    costs = inc.costs
    bptr, bnbr = instance.base_adjacency
    comp = np.array(components, dtype=np.int64)
    lab = np.array(labels, dtype=np.int64)
    A = np.flatnonzero(comp == m)
    B = np.flatnonzero(comp == m2)
    nA, nB = len(A), len(B)
    if nA + nB == 0 or m == m2:
        return TwoCutResult(0.0, comp, lab, "none")

    S = np.concatenate([A, B])
    loc = np.full(n, -1, dtype=np.int64)
    loc[S] = np.arange(len(S))
    in_a = np.arange(len(S)) < nA

    # base-graph neighbors of each local node on the opposite side
    starts = bptr[S]
    lens = bptr[S + 1] - starts
    bpos = np.repeat(np.arange(len(S)), lens)
    bnb = bnbr[np.repeat(starts, lens) + np.arange(lens.sum())
               - np.repeat(np.cumsum(lens) - lens, lens)]
    opposite = np.where(in_a[bpos], m2, m)
    cnt_other = np.bincount(bpos, weights=comp[bnb] == opposite, minlength=len(S))

    # gains[i, l]: objective change when S[i] moves to the other side labeled l
    ks, pos = inc.gather(S)
    w = inc.nbr[ks]
    lw, mw = lab[w], comp[w]
    lv = lab[S][pos]
    own = comp[S][pos]
    target = np.where(in_a[pos], m2, m)
    stay = costs[ks, (mw == own).view(np.int8), lv, lw]
    moved = costs[ks, (mw == target).view(np.int8), :, lw]
    gains = instance.node_costs[S] - instance.node_costs[S, lab[S]][:, None]
    np.add.at(gains, pos, moved - stay[:, None])

    if nA and nB:
        if not np.any(cnt_other[:nA]):
            # not adjacent in the base graph: neither moves nor a join apply
            return TwoCutResult(0.0, comp, lab, "none")
        between = (pos < nA) & (mw == m2)
        kb, lvb, lwb = ks[between], lv[between], lw[between]
        join_delta = float(np.sum(costs[kb, 1, lvb, lwb] - costs[kb, 0, lvb, lwb]))
    else:
        join_delta = 0.0

    # A moved node is inactive at once, so active nodes keep their side:
    # local indices below nA are in m, the others in m2.
    side_labels = lab[S]
    active = np.ones(len(S), dtype=bool)
    # an empty side makes the whole other component a candidate at first
    candidate = active.copy() if not (nA and nB) else cnt_other > 0
    seq = []
    cum = best = 0.0
    best_t = 0
    local = np.arange(len(S))
    while True:
        if joint:
            rowmin = gains.min(axis=1)
        else:
            rowmin = gains[local, side_labels]
        score = np.where(candidate, rowmin, np.inf)
        iv = int(np.argmin(score[:nA])) if nA else -1
        iw = nA + int(np.argmin(score[nA:])) if nB else -1
        dv = score[iv] if nA else np.inf
        dw = score[iw] if nB else np.inf
        if dv == np.inf and dw == np.inf:
            break
        if observer is not None:
            rows = np.flatnonzero(candidate)
            observer("move", lab, comp, S[rows], np.where(rows < nA, m2, m), gains[rows])
        # the m side wins ties
        i, d = (iv, dv) if dv <= dw else (iw, dw)
        u = int(S[i])
        from_a = i < nA
        c_old, c_new = (m, m2) if from_a else (m2, m)
        l_old = int(side_labels[i])
        l_new = int(np.argmin(gains[i])) if joint else l_old

        kk = np.arange(inc.ptr[u], inc.ptr[u + 1])
        j = loc[inc.nbr[kk]]
        sel = j >= 0
        if sel.any():
            kk, j = kk[sel], j[sel]
            wn = S[j]
            lwn, mwn = side_labels[j], comp[wn]
            tgt = np.where(mwn == m, m2, m)
            # contribution of the arc to u in the gains of its neighbors,
            # before and after u moves
            after = costs[kk, (tgt == c_new).view(np.int8), l_new, :] \
                - costs[kk, (mwn == c_new).view(np.int8), l_new, lwn][:, None]
            before = costs[kk, (tgt == c_old).view(np.int8), l_old, :] \
                - costs[kk, (mwn == c_old).view(np.int8), l_old, lwn][:, None]
            gains[j] += after - before

        jb = loc[bnbr[bptr[u]:bptr[u + 1]]]
        jb = jb[jb >= 0]
        if from_a:
            cnt_other[jb] += np.where(jb < nA, 1, -1)
        else:
            cnt_other[jb] += np.where(jb < nA, -1, 1)
        comp[u] = c_new
        lab[u] = side_labels[i] = l_new
        active[i] = False
        candidate = (cnt_other > 0) & active
        seq.append(i)
        cum += d
        if cum < best:
            best = cum
            best_t = len(seq)

    for i in reversed(seq[best_t:]):
        u = S[i]
        comp[u] = m if i < nA else m2
        lab[u] = labels[u]

    if min(best, join_delta) >= 0:
        return TwoCutResult(0.0, np.array(components, dtype=np.int64),
                            np.array(labels, dtype=np.int64), "none")
    if best < join_delta:
        return TwoCutResult(best, comp, lab, "moves", best_t)
    joined = np.array(components, dtype=np.int64)
    joined[joined == m] = m2
    return TwoCutResult(join_delta, joined, np.array(labels, dtype=np.int64), "join")


def update_two_cut(instance, components, labels, m, m2, joint=False, observer=None):
    """Improve the decomposition (and labeling, if ``joint``) between two components.

    Builds a greedy sequence of single-node moves between components ``m``
    and ``m2`` (each moved node is also relabeled when ``joint`` is set),
    then returns the better of the best prefix of that sequence and the join
    of ``m`` into ``m2``, or the unchanged input if neither improves.
    ``m2`` may be an unused index, standing for a new component.

    Components that are both nonempty but not adjacent in the base graph are
    left alone.  Intermediate and returned decompositions may be infeasible.

    Returns
    -------
    (delta, components, labels)
    """
    r = _two_cut(instance, components, labels, m, m2, joint, observer)
    return r.delta, r.components, r.labels


@dataclass
class SearchTrace:
    """Anytime record of a solver run."""

    elapsed: list = field(default_factory=list)
    objectives: list = field(default_factory=list)
    states: list = field(default_factory=list)
    record_states: bool = False
    iterations: int = 0
    sweeps: int = 0
    relabel_calls: int = 0
    moves: int = 0
    joins: int = 0
    repairs: int = 0
    truncated: bool = False
    _start: float = field(default_factory=time.perf_counter, repr=False)

    def checkpoint(self, objective, labels=None, components=None):
        self.elapsed.append(time.perf_counter() - self._start)
        self.objectives.append(float(objective))
        if self.record_states:
            self.states.append((np.array(labels), np.array(components)))

    def rows(self):
        return list(zip(self.elapsed, self.objectives))


def _pairs_adjacent(instance, comp):
    e = instance.base_edges
    if not len(e):
        return []
    a, b = comp[e[:, 0]], comp[e[:, 1]]
    diff = a != b
    lo = np.minimum(a[diff], b[diff])
    hi = np.maximum(a[diff], b[diff])
    if not len(lo):
        return []
    pairs = np.unique(np.stack([lo, hi], axis=1), axis=0)
    return [tuple(p) for p in pairs.tolist()]


def _lifted_multicut(instance, components, labels, joint, observer=None, trace=None,
                     deadline=None, on_sweep=None):
    comp = np.array(components, dtype=np.int64)
    lab = np.array(labels, dtype=np.int64)
    total = 0.0
    if joint:
        d, lab = update_labeling(instance, comp, lab, observer)
        total += d
        if trace is not None:
            trace.relabel_calls += 1
    active_comps = None  # None: every component active
    while True:
        if deadline is not None and time.perf_counter() >= deadline:
            if trace is not None:
                trace.truncated = True
            break
        start_comps, start_labels = comp.copy(), lab.copy()
        sweep = 0.0
        touched = set()
        present = np.unique(comp).tolist()
        for m, m2 in _pairs_adjacent(instance, comp):
            if active_comps is not None and m not in active_comps and m2 not in active_comps:
                continue
            r = _two_cut(instance, comp, lab, m, m2, joint, observer)
            if r.delta < 0:
                comp, lab = r.components, r.labels
                touched.update((m, m2))
                sweep += r.delta
                if trace is not None:
                    trace.moves += r.moves
                    trace.joins += r.kind == "join"
        for m in present:
            if active_comps is not None and m not in active_comps:
                continue
            m2 = int(comp.max()) + 1
            r = _two_cut(instance, comp, lab, m, m2, joint, observer)
            if r.delta < 0:
                comp, lab = r.components, r.labels
                touched.update((m, m2))
                sweep += r.delta
                if trace is not None:
                    trace.moves += r.moves
                    trace.joins += r.kind == "join"
        if joint:
            d, lab = update_labeling(instance, comp, lab, observer)
            sweep += d
            if trace is not None:
                trace.relabel_calls += 1
        if not is_feasible(instance, comp):
            broken = comp
            comp = repair(instance, comp)
            sweep = objective_of(instance, lab, comp) - objective_of(instance, start_labels, start_comps)
            # carry activity over to the repaired pieces
            touched = set(comp[np.isin(broken, list(touched))].tolist())
            if trace is not None:
                trace.repairs += 1
        if trace is not None:
            trace.sweeps += 1
        if not sweep < 0:
            comp, lab = start_comps, start_labels
            break
        total += sweep
        active_comps = touched
        if on_sweep is not None:
            on_sweep(total, lab, comp)
    return total, comp, lab


def update_lifted_multicut(instance, components, labels, joint=False, observer=None):
    """Sweep two-cut updates over all adjacent component pairs until no improvement.

    With ``joint`` set, nodes are relabeled while moved, and the labeling is
    re-optimized before the first and after every sweep.  The input
    decomposition must be feasible; the returned one is feasible.

    Returns
    -------
    (delta, components, labels)
    """
    return _lifted_multicut(instance, components, labels, joint, observer)


def _solve(instance, initial, joint, time_limit, max_iter, record_states, observer):
    trace = SearchTrace(record_states=record_states)
    deadline = None if time_limit is None else trace._start + time_limit
    lab = np.array(initial.labels, dtype=np.int64)
    comp = np.array(initial.components, dtype=np.int64)
    obj = objective_of(instance, lab, comp)
    trace.checkpoint(obj, lab, comp)

    def on_sweep(total, sweep_labels, sweep_comps):
        trace.checkpoint(base + total, sweep_labels, sweep_comps)

    while True:
        if max_iter is not None and trace.iterations >= max_iter:
            trace.truncated = True
            break
        if deadline is not None and time.perf_counter() >= deadline:
            trace.truncated = True
            break
        step = 0.0
        if not joint:
            d, lab = update_labeling(instance, comp, lab, observer)
            trace.relabel_calls += 1
            if d < 0:
                obj += d
                step += d
                trace.checkpoint(obj, lab, comp)
        base = obj
        d, comp, lab = _lifted_multicut(instance, comp, lab, joint, observer, trace, deadline,
                                      on_sweep)
        obj += d
        step += d
        trace.iterations += 1
        if not step < 0:
            break
    comp = canonical_components(comp)
    sol = Solution.evaluate(instance, lab, comp, algorithm="kljstarr" if joint else "kljr",
                            iterations=trace.iterations)
    trace.checkpoint(obj, lab, comp)
    return sol, trace


def solve_kljr(instance, initial, time_limit=None, max_iter=None, record_states=False,
               observer=None):
    """Alternating search: relabel for a fixed decomposition, then KLj for a fixed labeling.

    Repeats while either step strictly improves.  Returns ``(Solution, SearchTrace)``;
    the trace is marked ``truncated`` when a budget ran out.
    """
    return _solve(instance, initial, False, time_limit, max_iter, record_states, observer)


def solve_klj_star_r(instance, initial, time_limit=None, max_iter=None, record_states=False,
                     observer=None):
    """Joint search: node moves and relabels are chosen together."""
    return _solve(instance, initial, True, time_limit, max_iter, record_states, observer)


def solve_icm(instance, initial, record_states=False):
    """Relabeling only (iterated conditional modes) on the initial decomposition."""
    trace = SearchTrace(record_states=record_states)
    obj = objective_of(instance, initial.labels, initial.components)
    trace.checkpoint(obj, initial.labels, initial.components)
    d, lab = update_labeling(instance, initial.components, initial.labels)
    trace.relabel_calls += 1
    trace.iterations = 1
    comp = canonical_components(initial.components)
    trace.checkpoint(obj + d, lab, comp)
    return Solution.evaluate(instance, lab, comp, algorithm="icm", iterations=1), trace
