"""Dynamic shared-multicast-tree routing on Waxman random networks."""

from .algorithms import AlgorithmConfig, join, select_attachment
from .churn import Event, EventStream, Scenario, gen_event_stream, run_session, trace_max_delay
from .experiments import (
    ExperimentSpec,
    run_dynamic_fraction,
    stability_run,
    sweep_degree,
    sweep_group_size,
    sweep_omega,
    sweep_sources,
)
from .metrics import FitResult, MeasurementRecord, fit_exponential
from .network import Network, WaxmanParams, average_degree, calibrate_beta, generate_waxman
from .routing import DistanceTable, build_distance_table, node_average_distance, shortest_path
from .tree import MulticastTree, init_tree

__version__ = "0.1.0"
