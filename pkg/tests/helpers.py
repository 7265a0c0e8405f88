"""Shared instance builders and hypothesis strategies for the test suite."""
import numpy as np
from hypothesis import strategies as st

from nllmp import ProblemInstance
from nllmp.io import generate_random


def corpus_instance(seed, max_nodes=20, max_labels=4):
    """Member ``seed`` of the seeded random corpus used by the acceptance suites."""
    rng = np.random.default_rng([7, seed])
    n = int(rng.integers(2, max_nodes + 1))
    L = int(rng.integers(1, max_labels + 1))
    return generate_random(int(rng.integers(2 ** 31)), n,
                           edge_density=float(rng.uniform(0.05, 0.5)),
                           lift_density=float(rng.uniform(0.0, 0.5)),
                           num_labels=L)


def path(n, num_labels=1, lifted=(), join=0.0, cut=0.0, node_costs=None):
    """Path 0-1-...-(n-1) as base graph plus extra lifted arcs, constant costs."""
    edges = [(i, i + 1) for i in range(n - 1)]
    arcs = edges + list(lifted)
    L = num_labels
    nc = np.zeros((n, L)) if node_costs is None else node_costs
    return ProblemInstance(n, edges, arcs, nc, np.full((len(arcs), L, L), float(join)),
                           np.full((len(arcs), L, L), float(cut)))


def two_node():
    """Two nodes, one arc, labels a=0 and b=1; c(v,a)=1, join(a,a)=-2, every cut 3."""
    join = np.zeros((1, 2, 2))
    join[0, 0, 0] = -2
    return ProblemInstance(2, [(0, 1)], [(0, 1)], [[1, 0], [0, 0]], join,
                           np.full((1, 2, 2), 3.0))


@st.composite
def instances(draw, max_nodes=8, max_labels=3):
    seed = draw(st.integers(0, 2 ** 32 - 1))
    n = draw(st.integers(1, max_nodes))
    L = draw(st.integers(1, max_labels))
    ed = draw(st.floats(0, 1))
    ld = draw(st.floats(0, 1))
    return generate_random(seed, n, ed, ld, L, (-5, 5))


@st.composite
def states(draw, max_nodes=8, max_labels=3):
    """An instance with an arbitrary (possibly infeasible) labeling and component labeling."""
    inst = draw(instances(max_nodes, max_labels))
    n = inst.num_nodes
    lab = np.array(draw(st.lists(st.integers(0, inst.num_labels - 1), min_size=n, max_size=n)))
    comp = np.array(draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n)))
    return inst, lab, comp


# --- random special-case specs ---------------------------------------------

def random_uiqp(rng, n, L, p=0.5):
    from nllmp.reductions import UiqpSpec
    arcs = [(v, w) if rng.random() < 0.5 else (w, v)
            for v in range(n) for w in range(v + 1, n) if rng.random() < p]
    return UiqpSpec(n, arcs, rng.integers(-5, 6, (n, L)).astype(float),
                    rng.integers(-5, 6, (len(arcs), L, L)).astype(float))


def random_lmp(rng, n, edge_p=0.4, lift_p=0.4):
    from nllmp.reductions import LmpSpec
    order = rng.permutation(n)
    edges = {tuple(sorted((int(order[i]), int(order[rng.integers(i)])))) for i in range(1, n)}
    lifted = []
    for v in range(n):
        for w in range(v + 1, n):
            if (v, w) in edges:
                continue
            if rng.random() < edge_p:
                edges.add((v, w))
            elif rng.random() < lift_p:
                lifted.append((v, w))
    edges = sorted(edges)
    return LmpSpec(n, edges, lifted,
                   rng.integers(-5, 6, len(edges) + len(lifted)).astype(float))


def random_pose(rng, D, C):
    from nllmp.reductions import PoseSpec
    return PoseSpec(D, C, rng.integers(-5, 6, (D, C)).astype(float),
                    rng.integers(-5, 6, (D * (D - 1) // 2, C, C)).astype(float))


def random_tracking(rng, n, p=0.5):
    from nllmp.reductions import TrackingSpec
    edges = [(v, w) for v in range(n) for w in range(v + 1, n) if rng.random() < p]
    return TrackingSpec(n, edges, rng.integers(-5, 6, n).astype(float),
                        rng.integers(-5, 6, len(edges)).astype(float))
