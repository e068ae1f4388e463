"""Solver configuration, lightpath/solution records and their JSON documents."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Union

from .demand import CommDemand, CompDemand, Instance
from .topology import Path

SOLUTION_SCHEMA = "rwca.solution/1"


class Mode(str, enum.Enum):
    BYPASS = "bypass"
    OCCIN = "occin"


class Coupling(str, enum.Enum):
    PER_DEMAND = "demand"
    PER_SEGMENT = "segment"


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    LIMIT_REACHED = "limit_reached"


@dataclass(frozen=True)
class SolveConfig:
    mode: Mode = Mode.OCCIN
    coupling: Coupling = Coupling.PER_DEMAND
    max_wavelengths: int | None = None   # None: instance value or its default bound
    node_limit: int = 0                  # 0 = unlimited
    time_limit: float = 0.0              # seconds, 0 = unlimited
    deterministic: bool = True
    parallel_width: int = 1
    k_paths: int = 8
    order: str = "longest-first"         # or "input-order"

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "coupling", Coupling(self.coupling))
        if self.max_wavelengths is not None and self.max_wavelengths < 1:
            raise ValueError("max_wavelengths must be >= 1")
        if self.node_limit < 0 or self.time_limit < 0 or self.parallel_width < 0:
            raise ValueError("limits must be >= 0")
        if self.k_paths < 1:
            raise ValueError("k_paths must be >= 1")
        if self.order not in ("longest-first", "input-order"):
            raise ValueError(f"unknown demand order {self.order!r}")

    def wavelength_budget(self, inst: Instance) -> int:
        if self.max_wavelengths is not None:
            return self.max_wavelengths
        return inst.default_max_wavelengths()


Demand = Union[CommDemand, CompDemand]


@dataclass(frozen=True)
class Lightpath:
    route: Path
    wavelength: int   # 1-based
    segment: int = 0  # 0 for communication, 1: src1->x, 2: src2->x, 3: x->dst

    @property
    def hops(self) -> int:
        return self.route.hops


@dataclass(frozen=True)
class DemandResult:
    demand: Demand
    lightpaths: tuple[Lightpath, ...]
    computing_node: int | None = None


@dataclass
class Solution:
    mode: Mode
    coupling: Coupling
    status: Status
    results: tuple[DemandResult, ...] = ()
    max_wavelengths: int = 0
    stats: dict = field(default_factory=dict)

    def lightpaths(self) -> list[Lightpath]:
        return [lp for r in self.results for lp in r.lightpaths]

    @property
    def wavelength_count(self) -> int:
        return len({lp.wavelength for lp in self.lightpaths()})

    @property
    def wavelength_link_units(self) -> int:
        return sum(lp.hops for lp in self.lightpaths())

    @property
    def solved(self) -> bool:
        return self.status in (Status.OPTIMAL, Status.FEASIBLE) or (
            self.status is Status.LIMIT_REACHED and bool(self.results))


# ---------------------------------------------------------------------------
# JSON documents

def _demand_doc(d: Demand) -> dict:
    if isinstance(d, CommDemand):
        return {"type": "comm", "src": d.src + 1, "dst": d.dst + 1}
    return {"type": "comp", "src1": d.src1 + 1, "src2": d.src2 + 1, "dst": d.dst + 1}


def solution_to_dict(s: Solution, include_timing: bool = True) -> dict:
    stats = dict(s.stats)
    if not include_timing:
        stats.pop("time_ms", None)
    return {
        "schema": SOLUTION_SCHEMA,
        "mode": s.mode.value,
        "coupling": s.coupling.value,
        "status": s.status.value,
        "max_wavelengths": s.max_wavelengths,
        "metrics": {
            "wavelength_count": s.wavelength_count,
            "wavelength_link_units": s.wavelength_link_units,
        },
        "demands": [
            {
                "demand": _demand_doc(r.demand),
                "computing_node": None if r.computing_node is None else r.computing_node + 1,
                "segments": [
                    {"segment": lp.segment, "route": [v + 1 for v in lp.route.nodes], "lambda": lp.wavelength}
                    for lp in r.lightpaths
                ],
            }
            for r in s.results
        ],
        "stats": stats,
    }


def dump_solution(s: Solution, include_timing: bool = True) -> str:
    return json.dumps(solution_to_dict(s, include_timing), indent=2, sort_keys=False) + "\n"


class SolutionFormatError(ValueError):
    pass


def solution_from_dict(doc: dict, inst: Instance) -> Solution:
    """Rebuild a Solution; routes are taken as given (unknown arcs are rejected
    here, everything else is left to the validator)."""
    t = inst.topology
    try:
        if doc.get("schema") != SOLUTION_SCHEMA:
            raise SolutionFormatError(f"unsupported schema {doc.get('schema')!r}")
        results = []
        for rec in doc["demands"]:
            dd = rec["demand"]
            if dd["type"] == "comm":
                demand: Demand = CommDemand(dd["src"] - 1, dd["dst"] - 1)
            else:
                demand = CompDemand(dd["src1"] - 1, dd["src2"] - 1, dd["dst"] - 1)
            lps = []
            for seg in rec["segments"]:
                nodes = [v - 1 for v in seg["route"]]
                if any(not 0 <= v < t.node_count for v in nodes):
                    raise SolutionFormatError(f"route {seg['route']} outside topology")
                lps.append(Lightpath(_loose_path(inst, nodes), int(seg["lambda"]), int(seg.get("segment", 0))))
            x = rec.get("computing_node")
            results.append(DemandResult(demand, tuple(lps), None if x is None else x - 1))
        return Solution(
            mode=Mode(doc["mode"]),
            coupling=Coupling(doc.get("coupling", "demand")),
            status=Status(doc["status"]),
            results=tuple(results),
            max_wavelengths=int(doc.get("max_wavelengths", 0)),
            stats=dict(doc.get("stats", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SolutionFormatError):
            raise
        raise SolutionFormatError(f"malformed solution document: {exc}") from None


def _loose_path(inst: Instance, nodes: list[int]) -> Path:
    # keep non-simple or broken routes so the validator can report them;
    # missing arcs get id -1
    t = inst.topology
    arcs = tuple(t.arc_index.get((u, v), -1) for u, v in zip(nodes, nodes[1:]))
    return Path(tuple(nodes), arcs)


def load_solution(text: str, inst: Instance) -> Solution:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SolutionFormatError(f"invalid JSON: {exc}") from None
    return solution_from_dict(doc, inst)
