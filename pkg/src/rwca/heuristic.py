"""First-fit constructive heuristic over k-shortest route candidates."""

from __future__ import annotations

import itertools
import time

from .demand import CompDemand, Instance, bypass_instance
from .exact import computing_node_ranking
from .model import Coupling, DemandResult, Lightpath, Mode, SolveConfig, Solution, Status
from .topology import Topology, hop_distance_matrix, k_shortest_simple_paths


class UnreachableError(ValueError):
    pass


def choose_computing_node(t: Topology, q: CompDemand) -> int:
    ranking = computing_node_ranking(t, q)
    if len(ranking) < t.node_count - 1:
        raise UnreachableError(f"some node cannot serve {q.label()}: topology not strongly connected")
    return ranking[0]


def solve_heuristic(inst: Instance, cfg: SolveConfig | None = None) -> Solution:
    cfg = cfg or SolveConfig()
    start = time.monotonic()
    budget = cfg.wavelength_budget(inst)
    t = inst.topology
    dist = hop_distance_matrix(t)
    work = bypass_instance(inst) if cfg.mode is Mode.BYPASS else inst
    occupied: list[int] = []  # per wavelength arc mask

    def candidates(a, b):
        return [(sum(1 << e for e in p.arcs), p) for p in k_shortest_simple_paths(t, a, b, cfg.k_paths)]

    def fail():
        stats = {"time_ms": round(1000 * (time.monotonic() - start), 3)}
        return Solution(cfg.mode, cfg.coupling, Status.INFEASIBLE, (), budget, stats)

    def first_fit(route_sets):
        """Lowest wavelength on which some combination of mutually disjoint routes is free."""
        for w in range(budget):
            occ = occupied[w] if w < len(occupied) else 0
            for combo in itertools.product(*route_sets):
                m = 0
                for cm, _ in combo:
                    if cm & (occ | m):
                        break
                    m |= cm
                else:
                    return w, m, [p for _, p in combo]
        return None

    def take(w, m):
        while len(occupied) <= w:
            occupied.append(0)
        occupied[w] |= m

    jobs = []
    for i, d in enumerate(work.comm):
        jobs.append((dist[d.src][d.dst], "comm", i))
    xs = {}
    for i, q in enumerate(work.comp):
        try:
            x = choose_computing_node(t, q)
        except UnreachableError:
            return fail()
        xs[i] = x
        jobs.append((dist[q.src1][x] + dist[q.src2][x] + dist[x][q.dst], "comp", i))
    for cost, *_ in jobs:
        if cost < 0:
            return fail()
    if cfg.order == "longest-first":
        jobs.sort(key=lambda j: -j[0])

    comm_res = [None] * len(work.comm)
    comp_res = [None] * len(work.comp)
    for _, kind, i in jobs:
        if kind == "comm":
            d = work.comm[i]
            hit = first_fit([candidates(d.src, d.dst)])
            if hit is None:
                return fail()
            w, m, (p,) = hit
            take(w, m)
            comm_res[i] = DemandResult(d, (Lightpath(p, w + 1, 0),))
            continue
        q, x = work.comp[i], xs[i]
        segs = [(k, a, b) for k, a, b in ((1, q.src1, x), (2, q.src2, x), (3, x, q.dst)) if a != b]
        lps = []
        if cfg.coupling is Coupling.PER_DEMAND:
            hit = first_fit([candidates(a, b) for _, a, b in segs])
            if hit is None:
                return fail()
            w, m, paths = hit
            take(w, m)
            lps = [Lightpath(p, w + 1, k) for (k, _, _), p in zip(segs, paths)]
        else:
            for k, a, b in segs:
                hit = first_fit([candidates(a, b)])
                if hit is None:
                    return fail()
                w, m, (p,) = hit
                take(w, m)
                lps.append(Lightpath(p, w + 1, k))
        comp_res[i] = DemandResult(q, tuple(lps), x)

    results = comm_res + comp_res
    if cfg.mode is Mode.BYPASS:
        n = len(inst.comm)
        folded = results[:n]
        for j, q in enumerate(inst.comp):
            a, b = results[n + 2 * j].lightpaths[0], results[n + 2 * j + 1].lightpaths[0]
            folded.append(DemandResult(q, (Lightpath(a.route, a.wavelength, 1), Lightpath(b.route, b.wavelength, 2)),
                                       q.dst))
        results = folded
    stats = {"time_ms": round(1000 * (time.monotonic() - start), 3)}
    return Solution(cfg.mode, cfg.coupling, Status.FEASIBLE, tuple(results), budget, stats)
