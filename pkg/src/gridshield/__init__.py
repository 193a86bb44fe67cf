"""gridshield: two-stage stochastic MILP planning of wind-resilient distribution grids."""

from .errors import GridshieldError
from .formulation import (FormulationOptions, PlanDecision, baseline_plan,
                          build_extensive_form, extract_plan, extract_schedule,
                          fix_plan)
from .milp import ModelIR, Solution
from .network import Network, incident_lines, parse_network, validate_network
from .oracle import enumerate_optimal
from .report import compare_rod, cost_breakdown, emit_report, evaluate_plan
from .scenarios import (HazardConfig, ScenarioConfig, ScenarioSet,
                        generate_scenarios, load_scenario_set, save_scenario_set)
from .solver import SolverConfig, solve

__version__ = "0.1.0"

__all__ = [
    "GridshieldError", "FormulationOptions", "PlanDecision", "baseline_plan",
    "build_extensive_form", "extract_plan", "extract_schedule", "fix_plan",
    "ModelIR", "Solution", "Network", "incident_lines", "parse_network",
    "validate_network", "enumerate_optimal", "compare_rod", "cost_breakdown",
    "emit_report", "evaluate_plan", "HazardConfig", "ScenarioConfig",
    "ScenarioSet", "generate_scenarios", "load_scenario_set", "save_scenario_set",
    "SolverConfig", "solve", "__version__",
]
