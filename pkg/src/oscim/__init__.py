"""Coupled parametric-oscillator Ising machine simulator."""

from .circuit import CircuitParams, LagrangeParams, Method, default_params, lagrange_params
from .harness import (
    MultiRunStats,
    RunResult,
    TtsReport,
    multi_run,
    perturb_conductances,
    solve,
    sweep,
    time_to_solution,
)
from .integrate import IntegrationConfig, integrate_adaptive, integrate_em
from .io import load_instance
from .problems import (
    IsingInstance,
    brute_force_optimum,
    from_maxcut,
    from_qubo,
    ising_energy,
    objective_value,
)
from .state import AlgorithmState, OscillatorState

__version__ = "0.1.0"

__all__ = [
    "AlgorithmState",
    "CircuitParams",
    "IntegrationConfig",
    "IsingInstance",
    "LagrangeParams",
    "Method",
    "MultiRunStats",
    "OscillatorState",
    "RunResult",
    "TtsReport",
    "brute_force_optimum",
    "default_params",
    "from_maxcut",
    "from_qubo",
    "integrate_adaptive",
    "integrate_em",
    "ising_energy",
    "lagrange_params",
    "load_instance",
    "multi_run",
    "objective_value",
    "perturb_conductances",
    "solve",
    "sweep",
    "time_to_solution",
]
