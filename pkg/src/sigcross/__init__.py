"""Signed-network opinion dynamics for unsignalized four-way intersections.

Vehicles negotiate right of way through a continuous GO/YIELD opinion, a
commitment gate that checks occupancy windows, and a one-step grid-search
acceleration optimizer.  A first-come-first-served baseline shares the same
plant so the two policies can be compared on identical scenarios.
"""
from .engine import Policy, SimConfig, SimResult, VehicleSpec, World, run
from .gate import GateParams
from .geometry import IntersectionParams, ManeuverKind, build_path, classify_maneuver
from .opinion import OpinionParams
from .optimizer import OptimizerParams
from .scenario import ScenarioError, bundled_path, dump_scenario, load_scenario, parse_scenario
from .states import Sigma, Zone

__version__ = "0.1.0"

__all__ = [
    "GateParams",
    "IntersectionParams",
    "ManeuverKind",
    "OpinionParams",
    "OptimizerParams",
    "Policy",
    "ScenarioError",
    "Sigma",
    "SimConfig",
    "SimResult",
    "VehicleSpec",
    "World",
    "Zone",
    "build_path",
    "bundled_path",
    "classify_maneuver",
    "dump_scenario",
    "load_scenario",
    "parse_scenario",
    "run",
]
