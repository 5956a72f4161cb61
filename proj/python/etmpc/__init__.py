"""Event-triggered robust MPC for delayed polytopic systems."""

from ._etmpc import (
    EtmpcError,
    ScenarioConfig,
    Trajectory,
    initial_program,
    load_scenario,
    metrics,
    parse_scenario,
    run,
    solve_initial,
    validate,
)

__all__ = [
    "EtmpcError",
    "ScenarioConfig",
    "Trajectory",
    "initial_program",
    "load_scenario",
    "metrics",
    "parse_scenario",
    "run",
    "solve_initial",
    "validate",
]
