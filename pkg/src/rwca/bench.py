"""Destination sweep: one single-destination instance per node, both modes."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import __version__
from .demand import GeneratorSpec, generate_star_instance
from .exact import solve_exact
from .heuristic import solve_heuristic
from .model import Coupling, Mode, SolveConfig, Status
from .topology import Topology

CSV_COLUMNS = [
    "dest", "in_degree", "bypass_lambda", "occin_lambda", "bypass_wl_links", "occin_wl_links",
    "bypass_nodes_expanded", "occin_nodes_expanded", "bypass_ms", "occin_ms",
]
DEFAULT_SWEEP_SEED = 7


class SweepError(RuntimeError):
    pass


def destination_seed(seed: int, dest: int, pairing: str) -> int:
    """Seed for the pairing at ``dest`` (0-based).  "fixed" reuses one stream."""
    if pairing == "fixed":
        return seed
    if pairing != "fresh":
        raise ValueError(f"unknown pairing {pairing!r}")
    return seed * 1_000_003 + dest + 1


@dataclass
class BenchReport:
    topology: str
    seed: int
    coupling: str
    solver: str
    pairing: str
    rows: list[dict] = field(default_factory=list)
    version: str = __version__

    def column(self, name: str) -> list:
        return [r[name] for r in self.rows]

    def metadata(self) -> dict:
        return {
            "topology": self.topology, "seed": self.seed, "coupling": self.coupling,
            "solver": self.solver, "pairing": self.pairing, "version": self.version,
            "spearman_in_degree_bypass": spearman(self.column("in_degree"), self.column("bypass_lambda")),
            "spearman_in_degree_occin": spearman(self.column("in_degree"), self.column("occin_lambda")),
        }


def spearman(x, y) -> float:
    from scipy.stats import spearmanr

    if len(set(x)) < 2 or len(set(y)) < 2:
        return math.nan
    return float(spearmanr(x, y).statistic)


def _solve_row(args) -> dict:
    t, dest, seed, coupling, solver, deterministic, max_w = args
    inst = generate_star_instance(t, GeneratorSpec(dest, seed), max_w)
    row = {"dest": dest + 1, "in_degree": t.in_degree(dest)}
    solve = solve_exact if solver == "exact" else solve_heuristic
    for mode in (Mode.BYPASS, Mode.OCCIN):
        cfg = SolveConfig(mode=mode, coupling=coupling, deterministic=deterministic)
        sol = solve(inst, cfg)
        if sol.status not in (Status.OPTIMAL, Status.FEASIBLE):
            raise SweepError(f"destination {dest + 1}, {mode.value}: solver returned {sol.status.value}")
        key = mode.value
        row[f"{key}_lambda"] = sol.wavelength_count
        row[f"{key}_wl_links"] = sol.wavelength_link_units
        row[f"{key}_nodes_expanded"] = sol.stats.get("nodes_expanded", 0)
        row[f"{key}_ms"] = 0 if deterministic else round(sol.stats.get("time_ms", 0.0), 1)
    return row


def run_sweep(t: Topology, seed: int = DEFAULT_SWEEP_SEED, coupling: Coupling | str = Coupling.PER_DEMAND,
              solver: str = "exact", pairing: str = "fresh", deterministic: bool = True,
              jobs: int = 1, max_wavelengths: int | None = None) -> BenchReport:
    coupling = Coupling(coupling)
    if solver not in ("exact", "heuristic"):
        raise ValueError(f"unknown solver {solver!r}")
    tasks = [(t, v, destination_seed(seed, v, pairing), coupling, solver, deterministic, max_wavelengths)
             for v in range(t.node_count)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_solve_row, tasks))
    else:
        rows = [_solve_row(a) for a in tasks]
    rows.sort(key=lambda r: r["dest"])
    return BenchReport(t.name, seed, coupling.value, solver, pairing, rows)


def report_csv(rep: BenchReport) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rep.rows:
        w.writerow({k: r[k] for k in CSV_COLUMNS})
    return buf.getvalue()


def read_report_csv(text: str) -> list[dict]:
    rows = list(csv.DictReader(io.StringIO(text)))
    if rows and list(rows[0].keys()) != CSV_COLUMNS:
        raise ValueError("unexpected CSV columns")
    out = []
    for r in rows:
        out.append({k: (float(v) if k.endswith("_ms") else int(v)) for k, v in r.items()})
    return out
