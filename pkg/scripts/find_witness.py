"""Search tiny random instances for a start state that the alternating solver
cannot improve but the joint solver can.

Usage: python scripts/find_witness.py [max_seed] > tests/data/witness.txt
"""
import sys

import numpy as np

from nllmp import initial_solution, serialize_instance, solve_klj_star_r, solve_kljr
from nllmp.io import generate_random
from nllmp.model import same_partition


def is_witness(inst):
    start = initial_solution(inst)
    a, _ = solve_kljr(inst, start)
    b, _ = solve_klj_star_r(inst, start)
    fixed = (np.array_equal(a.labels, start.labels)
             and same_partition(a.components, start.components))
    return fixed and b.objective < a.objective


def search(max_seed=100000):
    # smallest instances first, then the fewest arcs
    for n in range(2, 6):
        for seed in range(max_seed):
            inst = generate_random(seed, n, edge_density=0.3, lift_density=0.3,
                                   num_labels=2, cost_range=(-3, 3))
            if is_witness(inst):
                return seed, n, inst
    return None


if __name__ == "__main__":
    found = search(int(sys.argv[1]) if len(sys.argv) > 1 else 100000)
    if found is None:
        sys.exit("no witness found")
    seed, n, inst = found
    print(f"# witness: generate_random(seed={seed}, n={n}, edge_density=0.3, "
          f"lift_density=0.3, num_labels=2, cost_range=(-3, 3))")
    sys.stdout.write(serialize_instance(inst))
