"""Resource-aware container placement (DRAPS) and SwarmKit-style baselines on a simulated cluster."""

from .core import (
    KINDS,
    Cluster,
    ContainerInstance,
    ContainerState,
    PlacementDecision,
    ResourceKind,
    ResourceVector,
    ServiceMode,
    ServiceSpec,
    WorkerNode,
    vector_mean,
    vector_normalize,
)
from .demand import DemandTrace, KnownServiceRegistry, read_trace_csv
from .metrics import brute_force_optimal_nu, check_constraints, cluster_nu, utilization
from .scenario import ScenarioConfig, load_scenario
from .schedulers import FilterSet, SchedulerKind, apply_filters, place_binpack, place_draps, place_random, place_spread
from .sim import Simulation, run

__version__ = "0.1.0"
