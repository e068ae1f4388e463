"""Exact minimum-wavelength provisioning by iterative feasibility search.

For W' = lower bound, lower bound + 1, ... a depth-first search tries to place
every demand using wavelengths 0..W'-1.  The first feasible W' is optimal.

The search state is one arc bitmask per wavelength ("layer").  Branching per
demand: computing node, then wavelength, then route for each segment.  Routes
come from a per node-pair catalogue of all simple paths sorted by (hops, node
sequence) and filtered against the layer's occupancy, so the first k routes
tried are exactly the k shortest paths of the residual layer and the tail is
the exhaustive enumeration.  Wavelength symmetry is broken by only opening the
lowest unused wavelength.

After every placement a max-flow relaxation is checked: requirements that end
at the same node are routed together through the stack of residual layers.
For a set of communication demands sharing one destination this check is
exact, and for computing demands it is a sound necessary condition.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .demand import CompDemand, Instance, bypass_instance
from .model import Coupling, DemandResult, Lightpath, Mode, SolveConfig, Solution, Status
from .topology import Path, Topology, all_simple_paths, hop_distance_matrix


class _LimitHit(Exception):
    pass


class PathCatalog:
    """Lazily built (arc mask, Path) lists per ordered node pair."""

    def __init__(self, t: Topology):
        self.t = t
        self._cache: dict[tuple[int, int], list[tuple[int, Path]]] = {}

    def get(self, src: int, dst: int) -> list[tuple[int, Path]]:
        key = (src, dst)
        paths = self._cache.get(key)
        if paths is None:
            paths = [(_mask(p.arcs), p) for p in all_simple_paths(self.t, src, dst)]
            self._cache[key] = paths
        return paths


def _mask(arcs) -> int:
    m = 0
    for a in arcs:
        m |= 1 << a
    return m


def lower_bound(inst: Instance, mode: Mode | str) -> int:
    """max over nodes v of ceil(lightpaths terminating at v / in-degree(v)).

    Each computing demand terminates two lightpaths at its destination in
    bypass mode and one in OCCIN mode.  A demand ending at a node without
    incoming arcs yields a sentinel larger than any wavelength budget.
    """
    mode = Mode(mode)
    t = inst.topology
    load = [0] * t.node_count
    for d in inst.comm:
        load[d.dst] += 1
    for q in inst.comp:
        load[q.dst] += 2 if mode is Mode.BYPASS else 1
    bound = 0
    for v, n in enumerate(load):
        if n == 0:
            continue
        deg = t.in_degree(v)
        if deg == 0:
            return 1 << 30
        bound = max(bound, -(-n // deg))
    return bound


# ---------------------------------------------------------------------------
# max-flow relaxation

@dataclass(frozen=True)
class _Req:
    sink: int
    sources: tuple[int, ...]
    layer: int | None  # None: any wavelength


def _relaxation_ok(t: Topology, occ: list[int], reqs: list[_Req]) -> bool:
    by_sink: dict[int, list[_Req]] = {}
    for r in reqs:
        by_sink.setdefault(r.sink, []).append(r)
    W = len(occ)
    for sink, group in by_sink.items():
        # cheap pre-check on the sink's free incoming arcs
        free_in = 0
        for w in range(W):
            for a in t.in_arcs[sink]:
                if not occ[w] >> a & 1:
                    free_in += 1
        if free_in < len(group):
            return False
        if not _group_flow_ok(t, occ, sink, group):
            return False
    return True


def _group_flow_ok(t: Topology, occ: list[int], sink: int, group: list[_Req]) -> bool:
    """Augmenting-path max flow: one unit per requirement into ``sink``.

    Nodes: ("v", v, w) layered copies, ("d", j) requirement nodes, "S", "T".
    """
    W = len(occ)
    cap: dict = {}
    adj: dict = {}

    def add(u, v, c):
        if (u, v) not in cap:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
            cap[(u, v)] = 0
            cap.setdefault((v, u), 0)
        cap[(u, v)] += c

    for w in range(W):
        m = occ[w]
        for arc in t.arcs:
            if not m >> arc.id & 1 and arc.tail != sink:
                add(("v", arc.tail, w), ("v", arc.head, w), 1)
        add(("v", sink, w), "T", len(group))
    for j, r in enumerate(group):
        add("S", ("d", j), 1)
        layers = range(W) if r.layer is None else (r.layer,)
        for s in r.sources:
            for w in layers:
                add(("d", j), ("v", s, w), 1)

    flow = 0
    while flow < len(group):
        parent = {"S": None}
        stack = ["S"]
        while stack and "T" not in parent:
            u = stack.pop()
            for v in adj.get(u, ()):
                if v not in parent and cap[(u, v)] > 0:
                    parent[v] = u
                    stack.append(v)
        if "T" not in parent:
            return False
        v = "T"
        while parent[v] is not None:
            u = parent[v]
            cap[(u, v)] -= 1
            cap[(v, u)] += 1
            v = u
        flow += 1
    return True


# ---------------------------------------------------------------------------
# search

@dataclass
class _Task:
    index: int                 # position in the instance's own demand list
    kind: str                  # "comm" or "comp"
    src: int = -1
    dst: int = -1
    s1: int = -1
    s2: int = -1
    nodes: tuple[int, ...] = ()  # candidate computing nodes, best first


def computing_node_ranking(t: Topology, q: CompDemand, dist=None) -> list[int]:
    """Nodes x != dst ordered by s1->x + s2->x + x->dst hop count.

    Ties prefer a source node (the one closer to the destination first), then
    lower node id.  Nodes unreachable on any segment are dropped.
    """
    if dist is None:
        dist = hop_distance_matrix(t)
    scored = []
    for x in range(t.node_count):
        if x == q.dst:
            continue
        legs = (dist[q.src1][x], dist[q.src2][x], dist[x][q.dst])
        if min(legs) < 0:
            continue
        is_source = x in (q.src1, q.src2)
        scored.append((sum(legs), 0 if is_source else 1, dist[x][q.dst] if is_source else 0, x))
    scored.sort()
    return [s[-1] for s in scored]


class _Search:
    def __init__(self, inst: Instance, cfg: SolveConfig, catalog: PathCatalog | None = None):
        self.inst = inst
        self.cfg = cfg
        self.t = inst.topology
        self.catalog = catalog or PathCatalog(self.t)
        self.dist = hop_distance_matrix(self.t)
        self.nodes_expanded = 0
        self.deadline = None
        self.tasks = self._make_tasks()
        self.occin = cfg.mode is Mode.OCCIN
        self.per_demand = cfg.coupling is Coupling.PER_DEMAND

    def _make_tasks(self) -> list[_Task]:
        d = self.dist
        tasks = []
        for i, c in enumerate(self.inst.comm):
            tasks.append((d[c.src][c.dst], _Task(i, "comm", src=c.src, dst=c.dst)))
        for i, q in enumerate(self.inst.comp):
            ranking = computing_node_ranking(self.t, q, d)
            cost = min((d[q.src1][x] + d[q.src2][x] + d[x][q.dst] for x in ranking), default=-1)
            tasks.append((cost, _Task(i, "comp", dst=q.dst, s1=q.src1, s2=q.src2, nodes=tuple(ranking))))
        if self.cfg.order == "longest-first":
            # stable sort keeps input order among equal costs
            tasks.sort(key=lambda ct: -ct[0])
        return [t for _, t in tasks]

    def routable(self) -> bool:
        for task in self.tasks:
            if task.kind == "comm" and self.dist[task.src][task.dst] < 0:
                return False
            if task.kind == "comp" and not task.nodes:
                return False
        return True

    def _unplaced_req(self, task: _Task) -> _Req:
        if task.kind == "comm":
            return _Req(task.dst, (task.src,), None)
        if self.per_demand:
            # src1->x->dst is an arc-disjoint trail on one wavelength
            return _Req(task.dst, (task.s1, task.s2), None)
        return _Req(task.dst, tuple(v for v in range(self.t.node_count) if v != task.dst), None)

    # -- DFS ---------------------------------------------------------------

    def feasible(self, W: int, root_branches: range | None = None):
        """Return {task_position: placement} for W wavelengths, or None."""
        self.W = W
        self.occ = [0] * W
        self.placed: list = [None] * len(self.tasks)
        self.suffix = [[self._unplaced_req(t) for t in self.tasks[i:]] for i in range(len(self.tasks) + 1)]
        self.failed: set = set()
        self.root_branches = root_branches
        self._branch_counter = 0
        if not _relaxation_ok(self.t, self.occ, self.suffix[0]):
            return None
        if self._dfs(0, 0):
            return list(self.placed)
        return None

    def _tick(self):
        self.nodes_expanded += 1
        if self.cfg.node_limit and self.nodes_expanded > self.cfg.node_limit:
            raise _LimitHit
        if self.deadline is not None and self.nodes_expanded % 256 == 0 and time.monotonic() > self.deadline:
            raise _LimitHit

    def _check(self, i: int, extra: list[_Req]) -> bool:
        return _relaxation_ok(self.t, self.occ, extra + self.suffix[i + 1])

    def _dfs(self, i: int, used: int) -> bool:
        if i == len(self.tasks):
            return True
        key = (i, tuple(sorted(self.occ)))
        if key in self.failed:
            return False
        task = self.tasks[i]
        if task.kind == "comm":
            ok = self._place_comm(i, task, used)
        elif self.occin and self.per_demand:
            ok = self._place_comp_joint(i, task, used)
        else:
            ok = self._place_comp_split(i, task, used)
        if not ok and len(self.failed) < 2_000_000:
            self.failed.add(key)
        return ok

    def _root_filter(self, i: int) -> bool:
        # parallel mode: each worker owns a slice of the first task's branches
        if i != 0 or self.root_branches is None:
            return True
        k = self._branch_counter
        self._branch_counter += 1
        return k in self.root_branches

    def _free_paths(self, src: int, dst: int, blocked: int):
        for m, p in self.catalog.get(src, dst):
            if not m & blocked:
                yield m, p

    def _place_comm(self, i, task, used) -> bool:
        for w in range(min(used + 1, self.W)):
            nu = max(used, w + 1)
            for m, p in self._free_paths(task.src, task.dst, self.occ[w]):
                if not self._root_filter(i):
                    continue
                self._tick()
                self.occ[w] |= m
                if self._check(i, []) and self._dfs(i + 1, nu):
                    self.placed[i] = ("comm", [(0, w, p)])
                    return True
                self.occ[w] &= ~m
        return False

    def _place_comp_joint(self, i, task, used) -> bool:
        """OCCIN with one wavelength for all segments of the demand."""
        d = task.dst
        for x in task.nodes:
            for w in range(min(used + 1, self.W)):
                nu = max(used, w + 1)
                if not self._root_filter(i):
                    continue
                segs = [(1, task.s1, x), (2, task.s2, x), (3, x, d)]
                segs = [s for s in segs if s[1] != s[2]]
                if self._route_segments(i, segs, [w] * len(segs), 0, [], nu, x):
                    return True
        return False

    def _route_segments(self, i, segs, layers, j, chosen, used, x) -> bool:
        if j == len(segs):
            if self._dfs(i + 1, used):
                self.placed[i] = ("comp", x, list(chosen))
                return True
            return False
        k, a, b = segs[j]
        w = layers[j]
        rest = [_Req(sb, (sa,), w) for (_, sa, sb), w in zip(segs[j + 1:], layers[j + 1:])]
        for m, p in self._free_paths(a, b, self.occ[w]):
            self._tick()
            self.occ[w] |= m
            if self._check(i, rest):
                chosen.append((k, w, p))
                if self._route_segments(i, segs, layers, j + 1, chosen, used, x):
                    return True
                chosen.pop()
            self.occ[w] &= ~m
        return False

    def _place_comp_split(self, i, task, used) -> bool:
        """Bypass-decomposed or OCCIN per-segment: every segment picks its own wavelength."""
        d = task.dst
        for x in task.nodes:
            segs = [(1, task.s1, x), (2, task.s2, x), (3, x, d)]
            segs = [s for s in segs if s[1] != s[2]]
            if not self._root_filter(i):
                continue
            if self._split_rec(i, segs, 0, [], used, x):
                return True
        return False

    def _split_rec(self, i, segs, j, chosen, used, x) -> bool:
        if j == len(segs):
            if self._dfs(i + 1, used):
                self.placed[i] = ("comp", x, list(chosen))
                return True
            return False
        k, a, b = segs[j]
        rest = [_Req(sb, (sa,), None) for (_, sa, sb) in segs[j + 1:]]
        for w in range(min(used + 1, self.W)):
            nu = max(used, w + 1)
            for m, p in self._free_paths(a, b, self.occ[w]):
                self._tick()
                self.occ[w] |= m
                if self._check(i, rest):
                    chosen.append((k, w, p))
                    if self._split_rec(i, segs, j + 1, chosen, nu, x):
                        return True
                    chosen.pop()
                self.occ[w] &= ~m
        return False

    # -- result ------------------------------------------------------------

    def to_results(self, placed) -> list:
        """Map task placements back to per-demand records in instance order."""
        comm = [None] * len(self.inst.comm)
        comp = [None] * len(self.inst.comp)
        for task, pl in zip(self.tasks, placed):
            if pl[0] == "comm":
                _, w, p = pl[1][0]
                comm[task.index] = DemandResult(self.inst.comm[task.index], (Lightpath(p, w + 1, 0),))
            else:
                _, x, segs = pl
                lps = tuple(Lightpath(p, w + 1, k) for k, w, p in sorted(segs, key=lambda s: s[0]))
                comp[task.index] = DemandResult(self.inst.comp[task.index], lps, x)
        return comm + comp


def _canonical_wavelengths(results: list[DemandResult]) -> list[DemandResult]:
    """Relabel wavelengths in order of first appearance."""
    relabel: dict[int, int] = {}
    for r in results:
        for lp in r.lightpaths:
            relabel.setdefault(lp.wavelength, len(relabel) + 1)
    return [
        DemandResult(r.demand, tuple(Lightpath(lp.route, relabel[lp.wavelength], lp.segment) for lp in r.lightpaths),
                     r.computing_node)
        for r in results
    ]


def _bypass_to_comp(inst: Instance, results: list[DemandResult]) -> list[DemandResult]:
    """Fold the decomposed pairs back into one record per computing demand."""
    n_comm = len(inst.comm)
    out = results[:n_comm]
    for j, q in enumerate(inst.comp):
        r1, r2 = results[n_comm + 2 * j], results[n_comm + 2 * j + 1]
        lps = (Lightpath(r1.lightpaths[0].route, r1.lightpaths[0].wavelength, 1),
               Lightpath(r2.lightpaths[0].route, r2.lightpaths[0].wavelength, 2))
        out.append(DemandResult(q, lps, q.dst))
    return out


def _worker(args):
    inst, cfg, W, branches = args
    s = _Search(inst, cfg)
    try:
        placed = s.feasible(W, branches)
    except _LimitHit:
        return "limit", None, s.nodes_expanded
    return ("found" if placed else "none"), (s.to_results(placed) if placed else None), s.nodes_expanded


def solve_exact(inst: Instance, cfg: SolveConfig | None = None) -> Solution:
    cfg = cfg or SolveConfig()
    start = time.monotonic()
    budget = cfg.wavelength_budget(inst)
    work = bypass_instance(inst) if cfg.mode is Mode.BYPASS else inst
    search = _Search(work, cfg)
    if cfg.time_limit:
        search.deadline = start + cfg.time_limit
    lb = max(1, lower_bound(inst, cfg.mode)) if inst.demand_count else 0
    stats = {"lower_bound": lb, "nodes_expanded": 0, "infeasible_budgets": []}

    def finish(status, results=()):
        results = list(results)
        if results and cfg.mode is Mode.BYPASS:
            results = _bypass_to_comp(inst, results)
        stats["nodes_expanded"] = search.nodes_expanded
        stats["time_ms"] = round(1000 * (time.monotonic() - start), 3)
        return Solution(cfg.mode, cfg.coupling, status, tuple(_canonical_wavelengths(results)), budget, stats)

    if inst.demand_count == 0:
        return finish(Status.OPTIMAL)
    if not search.routable() or lb > budget:
        return finish(Status.INFEASIBLE)

    for W in range(lb, budget + 1):
        try:
            if cfg.parallel_width > 1 and not cfg.deterministic:
                placed_results, expanded = _parallel_feasible(work, cfg, W)
                search.nodes_expanded += expanded
            else:
                placed = search.feasible(W)
                placed_results = search.to_results(placed) if placed else None
        except _LimitHit:
            return _limit_fallback(inst, cfg, finish)
        if placed_results is not None:
            return finish(Status.OPTIMAL, placed_results)
        stats["infeasible_budgets"].append(W)
    return finish(Status.INFEASIBLE)


def _parallel_feasible(work: Instance, cfg: SolveConfig, W: int):
    """Split the first task's branches round-robin over worker processes.

    Any feasible placement is acceptable for optimality; to keep output
    stable the lowest-numbered successful worker wins.
    """
    n = cfg.parallel_width
    # upper bound on root branch count; workers skip indices they do not own
    total = 1 << 20
    chunks = [range(k, total, n) for k in range(n)]
    with ProcessPoolExecutor(max_workers=n) as pool:
        outs = list(pool.map(_worker, [(work, cfg, W, c) for c in chunks]))
    expanded = sum(o[2] for o in outs)
    if any(o[0] == "limit" for o in outs):
        raise _LimitHit
    for status, results, _ in outs:
        if status == "found":
            return results, expanded
    return None, expanded


def _limit_fallback(inst, cfg, finish):
    from .heuristic import solve_heuristic

    h = solve_heuristic(inst, cfg)
    if h.results and h.status is Status.FEASIBLE:
        # heuristic output is already in instance order with comp records
        sol = finish(Status.LIMIT_REACHED)
        sol.results = h.results
        return sol
    return finish(Status.LIMIT_REACHED)


def solve_via_ilp(inst: Instance, cfg: SolveConfig, assignment: str) -> Solution:
    """Decode an external MILP solver's solution file for the exported model.

    Raises AssignmentParseError on unreadable text and
    InfeasibleAssignmentError when the values break the model or the decoded
    provisioning fails validation.
    """
    from .milp import InfeasibleAssignmentError, decode_solution, encode, parse_assignment
    from .validate import validate

    model = encode(inst, cfg.mode, cfg.coupling, cfg.wavelength_budget(inst))
    x = parse_assignment(assignment, model)
    sol = decode_solution(model, x, inst)
    report = validate(sol, inst, cfg)
    if not report.ok:
        v = report.violations[0]
        raise InfeasibleAssignmentError(v.rule, f"decoded solution fails {v.rule}: {v.detail}")
    if inst.demand_count and sol.wavelength_count == max(1, lower_bound(inst, cfg.mode)):
        sol.status = Status.OPTIMAL
    return sol
