"""Scenario scheduling, outcome assessment, the attack grid and byte accounting."""

from .matrix import DetectionMatrix, detection_matrix, grid, load_golden
from ..network import InterceptorHook, Network, TraceRecord
from .overhead import OverheadReport, measure_overhead
from .scenario import AttackOutcome, Cell, ScenarioConfig, ScenarioReport, run_scenario
from .world import ProtocolKind, World

__all__ = [
    "AttackOutcome", "Cell", "DetectionMatrix", "InterceptorHook", "Network", "OverheadReport",
    "ProtocolKind", "ScenarioConfig", "ScenarioReport", "TraceRecord", "World",
    "detection_matrix", "grid", "load_golden", "measure_overhead", "run_scenario",
]
