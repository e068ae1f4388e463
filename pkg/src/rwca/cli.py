"""Command line front end.

    rwca solve     --demands FILE [--topology FILE|builtin:cost239] [--mode bypass|occin] ...
    rwca generate  --dest N [--seed S]
    rwca sweep     [--seed S] [--pairing fresh|fixed] --out FILE.csv
    rwca export-lp --demands FILE --out FILE.lp
    rwca validate  --demands FILE --solution FILE.json

Exit codes: 0 success, 1 usage/parse/I-O error, 2 infeasible or validation
failure, 3 search limit reached.  Data goes to stdout (or --out), diagnostics
to stderr.  Relative topology paths that do not exist are looked up in
$RWCA_TOPOLOGY_DIR.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys

from .bench import DEFAULT_SWEEP_SEED, SweepError, report_csv, run_sweep
from .demand import CALIBRATION_SEED, DemandError, GeneratorSpec, builtin_demands, generate_star_instance, \
    parse_instance, serialize_instance
from .exact import solve_exact
from .heuristic import solve_heuristic
from .milp import AssignmentParseError, InfeasibleAssignmentError, encode, export_lp
from .model import SolveConfig, SolutionFormatError, Status, dump_solution, load_solution
from .topology import BUILTIN_TOPOLOGIES, TopologyError, load_topology
from .validate import validate

log = logging.getLogger("rwca")

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_LIMIT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def resolve_topology(spec: str):
    if spec.startswith("builtin:"):
        name = spec.split(":", 1)[1]
        if name not in BUILTIN_TOPOLOGIES:
            raise UsageError(f"unknown builtin topology {name!r} (have {sorted(BUILTIN_TOPOLOGIES)})")
        return BUILTIN_TOPOLOGIES[name]()
    path = spec
    base = os.environ.get("RWCA_TOPOLOGY_DIR")
    if not os.path.exists(path) and base and not os.path.isabs(path):
        path = os.path.join(base, spec)
    return load_topology(_read(path))


def resolve_demands(spec: str, t):
    text = builtin_demands(spec.split(":", 1)[1]) if spec.startswith("builtin:") else _read(spec)
    return parse_instance(text, t)


def _add_common(p, demands=True):
    p.add_argument("--topology", default="builtin:cost239", help="topology file or builtin:NAME")
    if demands:
        p.add_argument("--demands", required=True, help="demand file or builtin:NAME")
    p.add_argument("--coupling", choices=["demand", "segment"], default="demand")
    p.add_argument("--max-wavelengths", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rwca", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="provision a demand file")
    _add_common(p)
    p.add_argument("--mode", choices=["bypass", "occin"], default="occin")
    p.add_argument("--solver", choices=["exact", "heuristic"], default="exact")
    p.add_argument("--deterministic", action="store_true")
    p.add_argument("--output", choices=["json", "csv"], default="json")
    p.add_argument("--out")
    p.add_argument("--node-limit", type=int, default=0)
    p.add_argument("--time-limit", type=float, default=0.0)
    p.add_argument("--k-paths", type=int, default=8)
    p.add_argument("--order", choices=["longest-first", "input-order"], default="longest-first")
    p.add_argument("--jobs", type=int, default=1, help="parallel search width (ignored with --deterministic)")

    p = sub.add_parser("generate", help="write a single-destination computing instance")
    p.add_argument("--topology", default="builtin:cost239")
    p.add_argument("--dest", type=int, required=True, help="1-based destination node")
    p.add_argument("--seed", type=int, default=CALIBRATION_SEED)
    p.add_argument("--out")

    p = sub.add_parser("sweep", aliases=["bench-sweep"], help="solve every node as destination in both modes")
    p.add_argument("--topology", default="builtin:cost239")
    p.add_argument("--seed", type=int, default=DEFAULT_SWEEP_SEED)
    p.add_argument("--coupling", choices=["demand", "segment"], default="demand")
    p.add_argument("--solver", choices=["exact", "heuristic"], default="exact")
    p.add_argument("--pairing", choices=["fresh", "fixed"], default="fresh")
    p.add_argument("--max-wavelengths", type=int, default=None)
    p.add_argument("--deterministic", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--meta", help="also write run metadata as JSON")

    p = sub.add_parser("export-lp", help="write the integer program in LP format")
    _add_common(p)
    p.add_argument("--mode", choices=["bypass", "occin"], default="occin")
    p.add_argument("--secondary-flow", action="store_true", help="break ties by total flow")
    p.add_argument("--out")

    p = sub.add_parser("validate", help="check a solution document")
    _add_common(p)
    p.add_argument("--solution", required=True)
    p.add_argument("--mode", choices=["bypass", "occin"], default=None, help="default: the document's mode")
    return parser


def solution_csv(sol) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["demand", "computing_node", "segment", "route", "lambda"])
    for r in sol.results:
        x = "" if r.computing_node is None else r.computing_node + 1
        for lp in r.lightpaths:
            w.writerow([r.demand.label(), x, lp.segment, lp.route.label(), lp.wavelength])
    return buf.getvalue()


def cmd_solve(args) -> int:
    t = resolve_topology(args.topology)
    inst = resolve_demands(args.demands, t)
    cfg = SolveConfig(
        mode=args.mode, coupling=args.coupling, max_wavelengths=args.max_wavelengths,
        node_limit=args.node_limit, time_limit=args.time_limit, deterministic=args.deterministic,
        parallel_width=args.jobs, k_paths=args.k_paths, order=args.order,
    )
    sol = (solve_exact if args.solver == "exact" else solve_heuristic)(inst, cfg)
    log.info("%s/%s: %s, %d wavelength(s), %d wavelength-link units", args.mode, args.solver,
             sol.status.value, sol.wavelength_count, sol.wavelength_link_units)
    text = dump_solution(sol, include_timing=not args.deterministic) if args.output == "json" else solution_csv(sol)
    _write(args.out, text)
    return {Status.INFEASIBLE: EXIT_INFEASIBLE, Status.LIMIT_REACHED: EXIT_LIMIT}.get(sol.status, EXIT_OK)


def cmd_generate(args) -> int:
    t = resolve_topology(args.topology)
    if not 1 <= args.dest <= t.node_count:
        raise UsageError(f"--dest {args.dest} outside 1..{t.node_count}")
    inst = generate_star_instance(t, GeneratorSpec(args.dest - 1, args.seed))
    header = f"# {t.name}: destination {args.dest}, seed {args.seed}\n"
    _write(args.out, header + serialize_instance(inst))
    return EXIT_OK


def cmd_sweep(args) -> int:
    t = resolve_topology(args.topology)
    rep = run_sweep(t, seed=args.seed, coupling=args.coupling, solver=args.solver, pairing=args.pairing,
                    deterministic=args.deterministic, jobs=args.jobs, max_wavelengths=args.max_wavelengths)
    meta = rep.metadata()
    log.info("sweep %s seed=%s pairing=%s: spearman bypass=%.3f occin=%.3f", t.name, args.seed, args.pairing,
             meta["spearman_in_degree_bypass"], meta["spearman_in_degree_occin"])
    _write(args.out, report_csv(rep))
    if args.meta:
        _write(args.meta, json.dumps({**meta, "rows": rep.rows}, indent=2) + "\n")
    return EXIT_OK


def cmd_export_lp(args) -> int:
    t = resolve_topology(args.topology)
    inst = resolve_demands(args.demands, t)
    model = encode(inst, args.mode, args.coupling, args.max_wavelengths, args.secondary_flow)
    _write(args.out, export_lp(model))
    return EXIT_OK


def cmd_validate(args) -> int:
    t = resolve_topology(args.topology)
    inst = resolve_demands(args.demands, t)
    sol = load_solution(_read(args.solution), inst)
    cfg = SolveConfig(mode=args.mode or sol.mode, coupling=args.coupling,
                      max_wavelengths=args.max_wavelengths or sol.max_wavelengths or None)
    report = validate(sol, inst, cfg)
    sys.stdout.write(json.dumps(report.to_dict(), indent=2) + "\n")
    return EXIT_OK if report.ok else EXIT_INFEASIBLE


COMMANDS = {
    "solve": cmd_solve, "generate": cmd_generate, "sweep": cmd_sweep, "bench-sweep": cmd_sweep,
    "export-lp": cmd_export_lp, "validate": cmd_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, TopologyError, DemandError, SolutionFormatError, AssignmentParseError,
            InfeasibleAssignmentError, OSError, ValueError) as exc:
        print(f"rwca {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SweepError as exc:
        print(f"rwca {args.command}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
