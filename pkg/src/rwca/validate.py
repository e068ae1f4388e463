"""Constraint checker, spectral metrics and a brute-force optimum oracle.

Rule ids:

    R1  route is a simple path over existing arcs
    R2  no (arc, wavelength) pair carried twice
    R3  one wavelength per lightpath
    R4  lightpath endpoints match the demand and its computing node
    R5  computing node differs from the destination
    R6  per-demand coupling: all segments of a computing demand share a wavelength
    R7  every demand served exactly once
    R8  wavelength index within 1..max_wavelengths

The oracle below deliberately avoids the solver modules: it has its own path
enumeration and its own colouring search.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .demand import CommDemand, CompDemand, Instance
from .model import Coupling, Mode, SolveConfig, Solution


@dataclass(frozen=True)
class Violation:
    rule: str
    detail: str
    entities: tuple = ()


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def rules(self) -> set[str]:
        return {v.rule for v in self.violations}

    def to_dict(self) -> dict:
        return {
            "schema": "rwca.validation/1",
            "ok": self.ok,
            "violations": [{"rule": v.rule, "detail": v.detail, "entities": list(v.entities)}
                           for v in self.violations],
        }


def validate(s: Solution, inst: Instance, cfg: SolveConfig | None = None) -> ValidationReport:
    cfg = cfg or SolveConfig(mode=s.mode, coupling=s.coupling)
    t = inst.topology
    report = ValidationReport()
    bad = report.violations.append
    max_w = cfg.wavelength_budget(inst)
    occupancy: dict[tuple[int, int], str] = {}

    for ri, r in enumerate(s.results):
        dem = r.demand
        for lp in r.lightpaths:
            tag = f"{dem.label()} segment {lp.segment}"
            nodes = lp.route.nodes
            if len(nodes) < 2:
                bad(Violation("R1", f"{tag}: empty route", (ri, lp.segment)))
                continue
            arcs = []
            for u, v in zip(nodes, nodes[1:]):
                if not (0 <= u < t.node_count and 0 <= v < t.node_count) or not t.has_arc(u, v):
                    bad(Violation("R1", f"{tag}: no link {u + 1}->{v + 1}", (ri, lp.segment)))
                    break
                arcs.append(t.arc_id(u, v))
            else:
                if len(set(nodes)) != len(nodes):
                    bad(Violation("R1", f"{tag}: route {lp.route.label()} repeats a node", (ri, lp.segment)))
            if not isinstance(lp.wavelength, int):
                bad(Violation("R3", f"{tag}: wavelength {lp.wavelength!r} is not a single index", (ri,)))
                continue
            if not 1 <= lp.wavelength <= max_w:
                bad(Violation("R8", f"{tag}: wavelength {lp.wavelength} outside 1..{max_w}", (ri, lp.wavelength)))
            for a in arcs:
                key = (a, lp.wavelength)
                if key in occupancy:
                    arc = t.arcs[a]
                    bad(Violation("R2", f"{tag} and {occupancy[key]} both use wavelength {lp.wavelength} "
                                        f"on link {arc.tail + 1}->{arc.head + 1}",
                                  (arc.tail + 1, arc.head + 1, lp.wavelength)))
                else:
                    occupancy[key] = tag
        _check_endpoints(r, ri, s.mode, bad)
        if (s.mode is Mode.OCCIN and cfg.coupling is Coupling.PER_DEMAND and isinstance(dem, CompDemand)
                and len({lp.wavelength for lp in r.lightpaths}) > 1):
            bad(Violation("R6", f"{dem.label()}: segments use wavelengths "
                                f"{sorted({lp.wavelength for lp in r.lightpaths})}", (ri,)))

    want = Counter(list(inst.comm) + list(inst.comp))
    got = Counter(r.demand for r in s.results)
    for d in sorted(set(want) | set(got), key=repr):
        if want[d] != got[d]:
            bad(Violation("R7", f"{d.label()} required {want[d]} time(s), served {got[d]}", (d.label(),)))
    return report


def _check_endpoints(r, ri, mode: Mode, bad) -> None:
    dem = r.demand
    segs: dict[int, object] = {}
    for lp in r.lightpaths:
        if lp.segment in segs:
            bad(Violation("R4", f"{dem.label()}: segment {lp.segment} appears twice", (ri, lp.segment)))
        segs[lp.segment] = lp.route

    def ends(seg, a, b):
        route = segs.get(seg)
        if route is None:
            bad(Violation("R4", f"{dem.label()}: missing segment {seg} ({a + 1}->{b + 1})", (ri, seg)))
        elif route.nodes[0] != a or route.nodes[-1] != b:
            bad(Violation("R4", f"{dem.label()}: segment {seg} runs {route.nodes[0] + 1}->{route.nodes[-1] + 1}, "
                                f"expected {a + 1}->{b + 1}", (ri, seg)))

    if isinstance(dem, CommDemand):
        if set(segs) - {0}:
            bad(Violation("R4", f"{dem.label()}: unexpected segments {sorted(set(segs) - {0})}", (ri,)))
        ends(0, dem.src, dem.dst)
        return

    x = r.computing_node
    if mode is Mode.BYPASS:
        # computation happens electrically at the destination
        if x is not None and x != dem.dst:
            bad(Violation("R4", f"{dem.label()}: bypass computing node must be the destination", (ri, x)))
        expected = {1: (dem.src1, dem.dst), 2: (dem.src2, dem.dst)}
    else:
        if x is None:
            bad(Violation("R4", f"{dem.label()}: no computing node", (ri,)))
            return
        if x == dem.dst:
            bad(Violation("R5", f"{dem.label()}: computing node {x + 1} is the destination", (ri, x + 1)))
        expected = {k: (a, b) for k, a, b in ((1, dem.src1, x), (2, dem.src2, x), (3, x, dem.dst)) if a != b}
    for k in sorted(set(segs) - set(expected)):
        bad(Violation("R4", f"{dem.label()}: unexpected segment {k}", (ri, k)))
    for k, (a, b) in expected.items():
        ends(k, a, b)


def metrics(s: Solution) -> tuple[int, int]:
    return s.wavelength_count, s.wavelength_link_units


# ---------------------------------------------------------------------------
# brute-force oracle

@dataclass(frozen=True)
class OracleLimits:
    max_nodes: int = 6
    max_demands: int = 4
    max_wavelengths: int = 3
    max_route_hops: int = 5

    def __post_init__(self):
        if min(self.max_nodes, self.max_demands, self.max_wavelengths, self.max_route_hops) < 1:
            raise ValueError("oracle limits must be >= 1")


class OracleRefusal(ValueError):
    pass


def _routes(adj: dict, a: int, b: int, max_hops: int) -> list[frozenset]:
    """Arc sets ((u, v) pairs) of every simple a->b route up to max_hops."""
    found = []

    def go(v, seen, arcs):
        if v == b:
            found.append(frozenset(arcs))
            return
        if len(arcs) == max_hops:
            return
        for n in adj[v]:
            if n not in seen:
                go(n, seen | {n}, arcs + [(v, n)])

    go(a, {a}, [])
    return found


def brute_force_optimum(inst: Instance, cfg: SolveConfig, lim: OracleLimits = OracleLimits()) -> int | None:
    """Minimum wavelength count by exhaustive enumeration, None if infeasible
    within ``min(cfg budget, lim.max_wavelengths)``.

    Each demand contributes "options"; an option is a tuple of units and every
    unit is a set of arcs that must sit on one wavelength.  Options with the
    same units are merged.  A unit-by-unit colouring search with canonical
    colours (a new colour is always the lowest unused one) then finds the
    smallest palette.
    """
    t = inst.topology
    budget = cfg.wavelength_budget(inst)
    if t.node_count > lim.max_nodes or inst.demand_count > lim.max_demands or budget > lim.max_wavelengths:
        raise OracleRefusal(
            f"instance exceeds oracle limits ({t.node_count} nodes, {inst.demand_count} demands, {budget} wavelengths)")
    if lim.max_route_hops < t.node_count - 1:
        raise OracleRefusal("max_route_hops below node_count - 1 would make the oracle inexact")
    adj: dict[int, list[int]] = {v: [] for v in range(t.node_count)}
    for arc in t.arcs:
        adj[arc.tail].append(arc.head)
    hops = lim.max_route_hops
    occin = cfg.mode is Mode.OCCIN
    joint = cfg.coupling is Coupling.PER_DEMAND

    options: list[list[tuple[frozenset, ...]]] = []
    pairs = [(d.src, d.dst) for d in inst.comm]
    if not occin:
        for q in inst.comp:
            pairs += [(q.src1, q.dst), (q.src2, q.dst)]
    for a, b in pairs:
        options.append([(r,) for r in _routes(adj, a, b, hops)])
    if occin:
        for q in inst.comp:
            opts = set()
            for x in range(t.node_count):
                if x == q.dst:
                    continue
                legs = [(a, b) for a, b in ((q.src1, x), (q.src2, x), (x, q.dst)) if a != b]
                choices = [_routes(adj, a, b, hops) for a, b in legs]
                for combo in _product(choices):
                    if joint:
                        union = frozenset()
                        ok = True
                        for r in combo:
                            if union & r:
                                ok = False
                                break
                            union |= r
                        if ok:
                            opts.add((union,))
                    else:
                        opts.add(tuple(sorted(combo, key=sorted)))
            options.append(sorted(opts, key=lambda o: [sorted(u) for u in o]))
    if any(not o for o in options):
        return None
    if not options:
        return 0

    for palette in range(1, budget + 1):
        if _colourable(options, palette):
            return palette
    return None


def _product(lists):
    if not lists:
        yield ()
        return
    for head in lists[0]:
        for rest in _product(lists[1:]):
            yield (head,) + rest


def _colourable(options, palette: int) -> bool:
    colours: list[set] = [set() for _ in range(palette)]

    def place_units(units, k, opened, cont) -> bool:
        if k == len(units):
            return cont(opened)
        unit = units[k]
        for c in range(min(opened + 1, palette)):
            if colours[c] & unit:
                continue
            colours[c] |= unit
            if place_units(units, k + 1, max(opened, c + 1), cont):
                return True
            colours[c] -= unit
        return False

    def demand(i, opened) -> bool:
        if i == len(options):
            return True
        for opt in options[i]:
            if place_units(opt, 0, opened, lambda o: demand(i + 1, o)):
                return True
        return False

    return demand(0, 0)
