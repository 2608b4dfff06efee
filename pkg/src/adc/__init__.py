"""Quorum-based duty cycling for asynchronous sensor networks.

The pipeline in one breath: arrange each period's slots in a grid and
wake on a row-plus-column cross (any two crosses meet under any clock
shift), grow a BFS tree and color its regions so neighbors never share
a period window, then simulate the whole thing slot by slot against a
low-power-listening baseline.
"""

__version__ = "0.1.0"

from .quorum import (Demand, GridQuorumSystem, Quorum, build_grid_qs,
                     demand_rows, design_quorum, rendezvous, rotate,
                     verify_rotation_closure)
from .scheduling import (Schedule, build_schedule, delay_bounds,
                         export_schedule, parse_schedule, validate_schedule)
from .topology import (AggregationTree, InterferenceModel, Topology,
                       build_tree)

__all__ = [
    "AggregationTree", "Demand", "GridQuorumSystem", "InterferenceModel",
    "Quorum", "Schedule", "Topology", "__version__", "build_grid_qs",
    "build_schedule", "build_tree", "delay_bounds", "demand_rows",
    "design_quorum", "export_schedule", "parse_schedule", "rendezvous",
    "rotate", "validate_schedule", "verify_rotation_closure",
]
