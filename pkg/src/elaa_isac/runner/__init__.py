"""Scenario files, experiment orchestration and the ``elaa-isac-sim`` CLI."""

from .config import Scenario, default_scenario, load_scenario
from .experiments import (
    CaseSpec,
    Table,
    TradeoffCurve,
    TradeoffResult,
    TradeoffRow,
    case_grid,
    run_experiment,
    tradeoff_sweep,
)

__all__ = [
    "CaseSpec",
    "Scenario",
    "Table",
    "TradeoffCurve",
    "TradeoffResult",
    "TradeoffRow",
    "case_grid",
    "default_scenario",
    "load_scenario",
    "run_experiment",
    "tradeoff_sweep",
]
