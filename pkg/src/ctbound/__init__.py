"""Lagrangean decomposition dual bounds for minimum spanning trees under
conflict constraints."""

from .engine import BoundReport, EngineConfig, initial_kstab_bound, report_schema, solve
from .instance import ConflictGraph, Graph, Instance, InstanceError, build_conflict_graph, parse_instance, read_instance, write_instance
from .kernels import BACKEND
from .kstab import KstabQuery, KstabResult, KstabStatus, solve_kstab
from .lagrangean import DualPoint, Evaluator, InstanceInfeasible, evaluate_dual
from .lp import LpModel, LpOutcome, LpStatus, resolve_with_rows, solve_min
from .mst import EdgeFixing, TreeSolution, min_spanning_tree
from .preprocess import ReductionLog, probe
from .volume import VolumeConfig

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundReport",
    "ConflictGraph",
    "DualPoint",
    "EdgeFixing",
    "EngineConfig",
    "Evaluator",
    "Graph",
    "Instance",
    "InstanceError",
    "InstanceInfeasible",
    "KstabQuery",
    "KstabResult",
    "KstabStatus",
    "LpModel",
    "LpOutcome",
    "LpStatus",
    "ReductionLog",
    "TreeSolution",
    "VolumeConfig",
    "build_conflict_graph",
    "evaluate_dual",
    "initial_kstab_bound",
    "min_spanning_tree",
    "parse_instance",
    "probe",
    "read_instance",
    "report_schema",
    "resolve_with_rows",
    "solve",
    "solve_kstab",
    "solve_min",
    "write_instance",
]
