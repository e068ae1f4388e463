"""Wavelength planning for optical networks with in-network computing.

Solves routing and wavelength assignment (RWA) for optical-bypass networks and
routing, wavelength and computing assignment (RWCA) for networks whose nodes
can optically combine two lightpaths into one.
"""

__version__ = "0.1.0"

from .demand import CommDemand, CompDemand, GeneratorSpec, Instance, generate_star_instance, parse_instance
from .model import Coupling, Mode, SolveConfig, Solution, Status
from .topology import Topology, build_topology, builtin_cost239, load_topology

__all__ = [
    "CommDemand", "CompDemand", "Coupling", "GeneratorSpec", "Instance", "Mode", "SolveConfig", "Solution",
    "Status", "Topology", "build_topology", "builtin_cost239", "generate_star_instance", "load_topology",
    "parse_instance", "__version__",
]
