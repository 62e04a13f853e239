"""Deterministic storage simulator with a reinforcement-learning tuner."""

from ._core import (
    ConfigError,
    DeviceProfile,
    ExperimentSpec,
    FormatError,
    Report,
    ReportRow,
    Trace,
    TunableConfig,
    default_agent_bytes,
    experiment,
    fixture_experiment,
    make_trace,
    model_complexity,
    preset_names,
    run_ablation,
    run_experiment,
    simulate,
)

__all__ = [
    "ConfigError",
    "DeviceProfile",
    "ExperimentSpec",
    "FormatError",
    "Report",
    "ReportRow",
    "Trace",
    "TunableConfig",
    "default_agent_bytes",
    "experiment",
    "fixture_experiment",
    "make_trace",
    "model_complexity",
    "preset_names",
    "run_ablation",
    "run_experiment",
    "simulate",
]
