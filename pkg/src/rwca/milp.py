"""Arc-flow integer programs for RWA and RWCA, LP-file export and decoding.

Variables (all binary, indices 1-based in names):

    f_d<d>_s<k>_w<w>_e<e>   demand d, segment k, carried on wavelength w over arc e
    a_d<d>(_s<k>)_w<w>      wavelength choice (per segment under per-segment coupling)
    u_<w>                   wavelength w used anywhere
    c_q<q>_v<v>             computing node choice of computing demand q
    z_q<q>(_s<k>)_w<w>_v<v> product a * c

Segment 0 is a communication lightpath; computing demands have segments
1 (src1 -> x), 2 (src2 -> x) and 3 (x -> dst).  Demand ids run over
communication demands first, then computing demands.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .demand import Instance, bypass_instance
from .model import Coupling, DemandResult, Lightpath, Mode, Solution, Status
from .topology import Path


class EncodingError(ValueError):
    pass


class AssignmentParseError(ValueError):
    pass


class InfeasibleAssignmentError(ValueError):
    def __init__(self, constraint: str, message: str):
        super().__init__(message)
        self.constraint = constraint


@dataclass(frozen=True, order=True)
class VarKey:
    kind: str          # "f", "a", "u", "c", "z"
    d: int = 0
    seg: int | None = None
    w: int = 0
    e: int = 0
    v: int = 0

    @property
    def name(self) -> str:
        s = "" if self.seg is None else f"_s{self.seg}"
        if self.kind == "f":
            return f"f_d{self.d}_s{self.seg}_w{self.w}_e{self.e}"
        if self.kind == "a":
            return f"a_d{self.d}{s}_w{self.w}"
        if self.kind == "u":
            return f"u_{self.w}"
        if self.kind == "c":
            return f"c_q{self.d}_v{self.v}"
        if self.kind == "z":
            return f"z_q{self.d}{s}_w{self.w}_v{self.v}"
        raise ValueError(self.kind)


_NAME_RE = re.compile(
    r"^(?:f_d(?P<fd>\d+)_s(?P<fs>\d+)_w(?P<fw>\d+)_e(?P<fe>\d+)"
    r"|a_d(?P<ad>\d+)(?:_s(?P<as>\d+))?_w(?P<aw>\d+)"
    r"|u_(?P<uw>\d+)"
    r"|c_q(?P<cq>\d+)_v(?P<cv>\d+)"
    r"|z_q(?P<zq>\d+)(?:_s(?P<zs>\d+))?_w(?P<zw>\d+)_v(?P<zv>\d+))$"
)


def parse_var_name(name: str) -> VarKey:
    m = _NAME_RE.match(name)
    if not m:
        raise AssignmentParseError(f"not a variable name: {name!r}")
    g = {k: (int(v) if v is not None else None) for k, v in m.groupdict().items()}
    if g["fd"] is not None:
        return VarKey("f", g["fd"], g["fs"], g["fw"], g["fe"])
    if g["ad"] is not None:
        return VarKey("a", g["ad"], g["as"], g["aw"])
    if g["uw"] is not None:
        return VarKey("u", w=g["uw"])
    if g["cq"] is not None:
        return VarKey("c", g["cq"], v=g["cv"])
    return VarKey("z", g["zq"], g["zs"], g["zw"], v=g["zv"])


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple[tuple[VarKey, int], ...]
    sense: str   # "=", "<=", ">="
    rhs: int

    def satisfied(self, x: dict) -> bool:
        lhs = sum(c * x.get(k, 0) for k, c in self.terms)
        if self.sense == "=":
            return lhs == self.rhs
        if self.sense == "<=":
            return lhs <= self.rhs
        return lhs >= self.rhs


@dataclass
class IlpModel:
    kind: str                     # "rwa" or "rwca"
    coupling: Coupling
    wavelengths: int
    n_comm: int
    n_comp: int
    variables: list[VarKey] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict = field(default_factory=dict)

    def __post_init__(self):
        self._declared: set[VarKey] = set()

    def var(self, key: VarKey) -> VarKey:
        if key not in self._declared:
            self._declared.add(key)
            self.variables.append(key)
        return key

    def add(self, name: str, terms, sense: str, rhs: int) -> None:
        terms = tuple((k, c) for k, c in terms if c)
        for k, _ in terms:
            if k not in self._declared:
                raise EncodingError(f"constraint {name} uses undeclared {k.name}")
        self.constraints.append(Constraint(name, terms, sense, rhs))

    def is_declared(self, key: VarKey) -> bool:
        return key in self._declared

    @property
    def binaries(self) -> list[VarKey]:
        return self.variables


def _wavelengths(inst: Instance, wavelengths: int | None) -> int:
    W = wavelengths if wavelengths is not None else inst.default_max_wavelengths()
    if W < 1:
        raise EncodingError("max_wavelengths must be >= 1")
    return W


def _add_flow_block(m: IlpModel, inst: Instance, d: int, seg: int, W: int, src_term, dst_term) -> None:
    """Declare f for (d, seg) and its conservation rows.

    ``src_term(w, v)`` / ``dst_term(w, v)`` give the (key, coef) terms supplying
    and absorbing one unit at node v.
    """
    t = inst.topology
    for w in range(1, W + 1):
        for arc in t.arcs:
            m.var(VarKey("f", d, seg, w, arc.id + 1))
    for w in range(1, W + 1):
        for v in range(t.node_count):
            terms = [(VarKey("f", d, seg, w, e + 1), 1) for e in t.out_arcs[v]]
            terms += [(VarKey("f", d, seg, w, e + 1), -1) for e in t.in_arcs[v]]
            terms += [(k, -c) for k, c in src_term(w, v)]
            terms += [(k, c) for k, c in dst_term(w, v)]
            m.add(f"flow_d{d}_s{seg}_w{w}_v{v + 1}", terms, "=", 0)


def _finish(m: IlpModel, inst: Instance, W: int, secondary_flow: bool) -> IlpModel:
    t = inst.topology
    flows = [k for k in m.variables if k.kind == "f"]
    by_we: dict[tuple[int, int], list[VarKey]] = {}
    for k in flows:
        by_we.setdefault((k.w, k.e), []).append(k)
    for w in range(1, W + 1):
        for e in range(1, t.arc_count + 1):
            keys = by_we.get((w, e), [])
            if keys:
                m.add(f"clash_w{w}_e{e}", [(k, 1) for k in keys], "<=", 1)
    for k in flows:
        m.add(f"use_{k.name}", [(k, 1), (VarKey("u", w=k.w), -1)], "<=", 0)
    for w in range(1, W):
        m.add(f"sym_w{w}", [(VarKey("u", w=w), 1), (VarKey("u", w=w + 1), -1)], ">=", 0)
    weight = len(flows) + 1 if secondary_flow else 1
    m.objective = {VarKey("u", w=w): weight for w in range(1, W + 1)}
    if secondary_flow:
        for k in flows:
            m.objective[k] = 1
    return m


def _comm_block(m: IlpModel, inst: Instance, W: int) -> None:
    for j, dem in enumerate(inst.comm):
        d = j + 1
        for w in range(1, W + 1):
            m.var(VarKey("a", d, None, w))
        m.add(f"one_wl_d{d}", [(VarKey("a", d, None, w), 1) for w in range(1, W + 1)], "=", 1)
        _add_flow_block(
            m, inst, d, 0, W,
            lambda w, v, d=d, s=dem.src: [(VarKey("a", d, None, w), 1)] if v == s else [],
            lambda w, v, d=d, r=dem.dst: [(VarKey("a", d, None, w), 1)] if v == r else [],
        )


def encode_rwa(inst: Instance, wavelengths: int | None = None, secondary_flow: bool = False) -> IlpModel:
    """RWA for communication demands only (decompose computing demands first)."""
    if inst.comp:
        raise EncodingError("encode_rwa needs computing demands decomposed (see bypass_instance)")
    W = _wavelengths(inst, wavelengths)
    m = IlpModel("rwa", Coupling.PER_DEMAND, W, len(inst.comm), 0)
    for w in range(1, W + 1):
        m.var(VarKey("u", w=w))
    _comm_block(m, inst, W)
    return _finish(m, inst, W, secondary_flow)


def encode_rwca(inst: Instance, coupling: Coupling | str = Coupling.PER_DEMAND,
                wavelengths: int | None = None, secondary_flow: bool = False) -> IlpModel:
    coupling = Coupling(coupling)
    W = _wavelengths(inst, wavelengths)
    t = inst.topology
    n = t.node_count
    m = IlpModel("rwca", coupling, W, len(inst.comm), len(inst.comp))
    for w in range(1, W + 1):
        m.var(VarKey("u", w=w))
    _comm_block(m, inst, W)
    per_seg = coupling is Coupling.PER_SEGMENT
    for j, q in enumerate(inst.comp):
        d = len(inst.comm) + j + 1
        for v in range(1, n + 1):
            m.var(VarKey("c", d, v=v))
        m.add(f"one_node_q{d}", [(VarKey("c", d, v=v), 1) for v in range(1, n + 1)], "=", 1)
        m.add(f"not_dst_q{d}", [(VarKey("c", d, v=q.dst + 1), 1)], "=", 0)
        seg_ids = (1, 2, 3) if per_seg else (None,)
        for sk in seg_ids:
            for w in range(1, W + 1):
                m.var(VarKey("a", d, sk, w))
            m.add(f"one_wl_d{d}" + ("" if sk is None else f"_s{sk}"),
                  [(VarKey("a", d, sk, w), 1) for w in range(1, W + 1)], "=", 1)
            for w in range(1, W + 1):
                for v in range(1, n + 1):
                    z = m.var(VarKey("z", d, sk, w, v=v))
                    a = VarKey("a", d, sk, w)
                    c = VarKey("c", d, v=v)
                    tag = f"q{d}" + ("" if sk is None else f"_s{sk}") + f"_w{w}_v{v}"
                    m.add(f"lin_a_{tag}", [(z, 1), (a, -1)], "<=", 0)
                    m.add(f"lin_c_{tag}", [(z, 1), (c, -1)], "<=", 0)
                    m.add(f"lin_ac_{tag}", [(z, 1), (a, -1), (c, -1)], ">=", -1)
        for seg, src in ((1, q.src1), (2, q.src2)):
            sk = seg if per_seg else None
            _add_flow_block(
                m, inst, d, seg, W,
                lambda w, v, d=d, sk=sk, s=src: [(VarKey("a", d, sk, w), 1)] if v == s else [],
                lambda w, v, d=d, sk=sk: [(VarKey("z", d, sk, w, v=v + 1), 1)],
            )
        sk = 3 if per_seg else None
        _add_flow_block(
            m, inst, d, 3, W,
            lambda w, v, d=d, sk=sk: [(VarKey("z", d, sk, w, v=v + 1), 1)],
            lambda w, v, d=d, sk=sk, r=q.dst: [(VarKey("a", d, sk, w), 1)] if v == r else [],
        )
    return _finish(m, inst, W, secondary_flow)


def encode(inst: Instance, mode: Mode | str, coupling: Coupling | str = Coupling.PER_DEMAND,
           wavelengths: int | None = None, secondary_flow: bool = False) -> IlpModel:
    if Mode(mode) is Mode.BYPASS:
        return encode_rwa(bypass_instance(inst), wavelengths, secondary_flow)
    return encode_rwca(inst, coupling, wavelengths, secondary_flow)


# ---------------------------------------------------------------------------
# LP text

def _expr(terms, per_line: int = 8) -> str:
    parts = []
    for i, (k, c) in enumerate(terms):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        body = k.name if mag == 1 else f"{mag} {k.name}"
        parts.append(body if i == 0 and sign == "+" else f"{sign} {body}")
    lines = [" ".join(parts[i:i + per_line]) for i in range(0, len(parts), per_line)]
    return "\n   ".join(lines) if lines else "0"


def export_lp(m: IlpModel) -> str:
    sense = {"=": "=", "<=": "<=", ">=": ">="}
    out = [f"\\ {m.kind} model, {m.wavelengths} wavelengths, coupling={m.coupling.value}", "Minimize"]
    out.append(" obj: " + _expr(list(m.objective.items())))
    out.append("Subject To")
    for c in m.constraints:
        out.append(f" {c.name}: {_expr(c.terms)} {sense[c.sense]} {c.rhs}")
    out.append("Binaries")
    for i in range(0, len(m.variables), 8):
        out.append(" " + " ".join(k.name for k in m.variables[i:i + 8]))
    out.append("End")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# assignments

_XML_RE = re.compile(r'<variable\b[^>]*\bname="([^"]+)"[^>]*\bvalue="([^"]+)"')


def parse_assignment(text: str, m: IlpModel) -> dict:
    """Read variable values from a solver solution file.

    Accepts "name value" lines (HiGHS/Gurobi style, other lines ignored) and
    CPLEX XML ``<variable name=... value=...>`` records.  Variables not
    mentioned are zero.
    """
    pairs = _XML_RE.findall(text)
    if not pairs:
        for line in text.splitlines():
            tok = line.replace("=", " ").split()
            if len(tok) >= 2 and _NAME_RE.match(tok[0]):
                pairs.append((tok[0], tok[1]))
    if not pairs:
        raise AssignmentParseError("no variable values found")
    declared = set(m.variables)
    x = {}
    for name, val in pairs:
        key = parse_var_name(name)
        if key not in declared:
            raise InfeasibleAssignmentError("", f"{name} is not a variable of this model")
        try:
            fv = float(val)
        except ValueError:
            raise AssignmentParseError(f"bad value {val!r} for {name}") from None
        iv = round(fv)
        if abs(fv - iv) > 1e-6 or iv not in (0, 1):
            raise InfeasibleAssignmentError("", f"{name} = {val} is not binary")
        x[key] = iv
    return x


def check_assignment(m: IlpModel, x: dict) -> None:
    for c in m.constraints:
        if not c.satisfied(x):
            detail = c.name
            mt = re.match(r"clash_w(\d+)_e(\d+)", c.name)
            if mt:
                detail += f" (wavelength {mt.group(1)}, arc {mt.group(2)})"
            raise InfeasibleAssignmentError(c.name, f"assignment violates {detail}")


def _walk(inst: Instance, arcs_used: set[int], src: int, dst: int) -> Path:
    """Follow flow arcs from src to dst and erase loops; leftover cycles are dropped."""
    t = inst.topology
    remaining = set(arcs_used)
    nodes = [src]
    v = src
    while v != dst:
        nxt = [a for a in t.out_arcs[v] if a in remaining]
        if not nxt:
            raise InfeasibleAssignmentError("", f"flow from node {src + 1} breaks off at node {v + 1}")
        a = nxt[0]
        remaining.discard(a)
        v = t.arcs[a].head
        if v in nodes:
            del nodes[nodes.index(v) + 1:]
        else:
            nodes.append(v)
    return t.path(nodes)


def decode_solution(m: IlpModel, x: dict, inst: Instance) -> Solution:
    work = bypass_instance(inst) if m.kind == "rwa" else inst
    if (m.n_comm, m.n_comp) != (len(work.comm), len(work.comp)):
        raise InfeasibleAssignmentError("", "model and instance have different demand sets")
    check_assignment(m, x)
    t = inst.topology
    flows: dict[tuple[int, int, int], set[int]] = {}
    for k, val in x.items():
        if k.kind == "f" and val:
            flows.setdefault((k.d, k.seg, k.w), set()).add(k.e - 1)

    def chosen_w(d, sk):
        ws = [w for w in range(1, m.wavelengths + 1) if x.get(VarKey("a", d, sk, w), 0)]
        return ws[0]

    results = []
    for j, dem in enumerate(work.comm):
        d = j + 1
        w = chosen_w(d, None)
        p = _walk(inst, flows.get((d, 0, w), set()), dem.src, dem.dst)
        results.append(DemandResult(dem, (Lightpath(p, w, 0),)))
    for j, q in enumerate(work.comp):
        d = len(work.comm) + j + 1
        xv = [v for v in range(1, t.node_count + 1) if x.get(VarKey("c", d, v=v), 0)][0] - 1
        lps = []
        for seg, a, b in ((1, q.src1, xv), (2, q.src2, xv), (3, xv, q.dst)):
            if a == b:
                continue
            sk = seg if m.coupling is Coupling.PER_SEGMENT else None
            w = chosen_w(d, sk)
            lps.append(Lightpath(_walk(inst, flows.get((d, seg, w), set()), a, b), w, seg))
        results.append(DemandResult(q, tuple(lps), xv))

    mode = Mode.OCCIN
    if m.kind == "rwa":
        mode = Mode.BYPASS
        n = len(inst.comm)
        folded = results[:n]
        for j, q in enumerate(inst.comp):
            a = results[n + 2 * j].lightpaths[0]
            b = results[n + 2 * j + 1].lightpaths[0]
            folded.append(DemandResult(q, (Lightpath(a.route, a.wavelength, 1), Lightpath(b.route, b.wavelength, 2)),
                                       q.dst))
        results = folded
    objective = sum(c * x.get(k, 0) for k, c in m.objective.items())
    return Solution(mode, m.coupling, Status.FEASIBLE, tuple(results), m.wavelengths, {"objective": objective})


def model_size(m: IlpModel) -> tuple[int, int]:
    return len(m.variables), len(m.constraints)



def assignment_from_solution(m: IlpModel, s: Solution, inst: Instance) -> dict:
    """Variable values that encode a given provisioning (inverse of decode_solution)."""
    x = {}
    used = set()
    n_comm = len(inst.comm)
    if m.kind == "rwa":
        d = n_comm
        records = []
        for i, r in enumerate(s.results):
            if i < n_comm:
                records.append((i + 1, r.lightpaths[0], 0))
            else:
                for lp in sorted(r.lightpaths, key=lambda lp: lp.segment):
                    d += 1
                    records.append((d, lp, 0))
        for d, lp, seg in records:
            x[VarKey("a", d, None, lp.wavelength)] = 1
            used.add(lp.wavelength)
            for e in lp.route.arcs:
                x[VarKey("f", d, seg, lp.wavelength, e + 1)] = 1
    else:
        per_seg = m.coupling is Coupling.PER_SEGMENT
        for i, r in enumerate(s.results):
            d = i + 1
            for lp in r.lightpaths:
                used.add(lp.wavelength)
                for e in lp.route.arcs:
                    x[VarKey("f", d, lp.segment, lp.wavelength, e + 1)] = 1
            if i < n_comm:
                x[VarKey("a", d, None, r.lightpaths[0].wavelength)] = 1
                continue
            xv = r.computing_node + 1
            x[VarKey("c", d, v=xv)] = 1
            by_seg = {lp.segment: lp.wavelength for lp in r.lightpaths}
            if per_seg:
                for k in (1, 2, 3):
                    # a degenerate segment carries no flow; any wavelength will do
                    w = by_seg.get(k, min(by_seg.values()))
                    x[VarKey("a", d, k, w)] = 1
                    x[VarKey("z", d, k, w, v=xv)] = 1
            else:
                w = next(iter(by_seg.values()))
                x[VarKey("a", d, None, w)] = 1
                x[VarKey("z", d, None, w, v=xv)] = 1
    for w in used:
        x[VarKey("u", w=w)] = 1
    return x


def format_assignment(m: IlpModel, x: dict) -> str:
    """Solution file text in the "name value" layout read by parse_assignment."""
    return "".join(f"{k.name} {x.get(k, 0)}\n" for k in m.variables)
