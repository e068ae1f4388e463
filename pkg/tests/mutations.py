"""Canonical solution mutations used by the validator sensitivity tests."""

import dataclasses

from rwca.demand import CompDemand
from rwca.model import DemandResult, Mode
from rwca.topology import Path


def _replace_lightpath(sol, ri, li, new):
    r = sol.results[ri]
    lps = list(r.lightpaths)
    lps[li] = new
    results = list(sol.results)
    results[ri] = dataclasses.replace(r, lightpaths=tuple(lps))
    return dataclasses.replace(sol, results=tuple(results))


def _positions(sol):
    return [(ri, li, lp) for ri, r in enumerate(sol.results) for li, lp in enumerate(r.lightpaths)]


def collide(sol):
    """Give a lightpath the wavelength of another one sharing an arc, or None."""
    pos = _positions(sol)
    for ri, li, lp in pos:
        for rj, lj, other in pos:
            if (ri, li) != (rj, lj) and lp.wavelength != other.wavelength and set(lp.route.arcs) & set(other.route.arcs):
                return _replace_lightpath(sol, ri, li, dataclasses.replace(lp, wavelength=other.wavelength))
    return None


def truncate(sol):
    """Cut the last hop off the first lightpath."""
    pos = _positions(sol)
    if not pos:
        return None
    ri, li, lp = pos[0]
    cut = Path(lp.route.nodes[:-1], lp.route.arcs[:-1])
    return _replace_lightpath(sol, ri, li, dataclasses.replace(lp, route=cut))


def move_to_destination(sol):
    """Put the computing node of the first computing demand on its destination (OCCIN only)."""
    if sol.mode is not Mode.OCCIN:
        return None
    for ri, r in enumerate(sol.results):
        if isinstance(r.demand, CompDemand):
            results = list(sol.results)
            results[ri] = DemandResult(r.demand, r.lightpaths, r.demand.dst)
            return dataclasses.replace(sol, results=tuple(results))
    return None


MUTATIONS = {"collision": (collide, "R2"), "truncation": (truncate, "R4"), "x_is_destination": (move_to_destination, "R5")}
