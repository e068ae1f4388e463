"""Seeded random small instances shared by the cross-check tests."""

import random

from rwca.demand import CommDemand, CompDemand, Instance
from rwca.topology import build_topology


def random_instance(seed: int, max_nodes: int = 6, max_demands: int = 4, wavelengths: int = 3) -> Instance:
    rng = random.Random(seed)
    n = rng.randint(4, max_nodes)
    # random spanning tree plus a few chords
    edges = set()
    order = list(range(n))
    rng.shuffle(order)
    for i in range(1, n):
        u, v = order[i], order[rng.randrange(i)]
        edges.add((min(u, v), max(u, v)))
    for _ in range(rng.randint(0, 3)):
        u, v = rng.sample(range(n), 2)
        edges.add((min(u, v), max(u, v)))
    t = build_topology(n, sorted(edges), name=f"rand{seed}")
    k = rng.randint(1, max_demands)
    comm, comp = [], []
    for _ in range(k):
        if rng.random() < 0.5:
            a, b = rng.sample(range(n), 2)
            comm.append(CommDemand(a, b))
        else:
            a, b, c = rng.sample(range(n), 3)
            comp.append(CompDemand(a, b, c))
    return Instance(t, comm, comp, wavelengths)
