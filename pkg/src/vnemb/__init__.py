"""Event-driven embedding simulator, solver suite, and decision environment."""

__version__ = "0.1.0"

from .config import SimulationConfig, load_config, preset_config, build_physical_network
from .embedding import (Solution, FeasibilityReport, k_shortest_paths,
                        route_virtual_link, check_node_placement,
                        evaluate_solution, verify_solution, allocate, release)
from .environment import (Instance, RewardSpec, EnvState, Observation,
                          env_reset, env_step, action_mask, extract_features)
from .metrics import MetricsSummary, compute_metrics
from .netmodel import (PhysicalNetwork, VirtualNetworkRequest, ResourceSpec,
                       generate_waxman_topology, load_topology_file,
                       apply_resource_specs)
from .config import generate_request_sequence
from .simulator import Event, RunRecord, run_simulation, run_many
from .solvers import make_solver, solver_names

__all__ = [
    "SimulationConfig", "load_config", "preset_config", "build_physical_network",
    "Solution", "FeasibilityReport", "k_shortest_paths", "route_virtual_link",
    "check_node_placement", "evaluate_solution", "verify_solution", "allocate",
    "release", "Instance", "RewardSpec", "EnvState", "Observation", "env_reset",
    "env_step", "action_mask", "extract_features", "MetricsSummary",
    "compute_metrics", "PhysicalNetwork", "VirtualNetworkRequest", "ResourceSpec",
    "generate_waxman_topology", "load_topology_file", "apply_resource_specs",
    "generate_request_sequence", "Event", "RunRecord", "run_simulation",
    "run_many", "make_solver", "solver_names",
]
