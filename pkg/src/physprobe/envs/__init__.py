"""Simulated environments and their episode adapters."""

from .base import EnvironmentAdapter, QuerySpec
from .classical import ClassicalConfig, ClassicalEnvironment, GravityLaw
from .fluid import FluidConfig, FluidEnvironment, ForcingKind
from .quantum import QuantumConfig, QuantumEnvironment

ENVIRONMENT_KINDS = {
    "classical": (ClassicalConfig, ClassicalEnvironment),
    "fluid": (FluidConfig, FluidEnvironment),
    "quantum": (QuantumConfig, QuantumEnvironment),
}


def make_environment(kind: str, config, seed: int, cost_model=None) -> EnvironmentAdapter:
    from ..errors import ConfigurationError

    if kind not in ENVIRONMENT_KINDS:
        raise ConfigurationError(
            f"unknown environment {kind!r}; expected one of {sorted(ENVIRONMENT_KINDS)}"
        )
    _, env_cls = ENVIRONMENT_KINDS[kind]
    return env_cls(config, seed, cost_model=cost_model)


__all__ = [
    "EnvironmentAdapter",
    "QuerySpec",
    "ClassicalConfig",
    "ClassicalEnvironment",
    "GravityLaw",
    "FluidConfig",
    "FluidEnvironment",
    "ForcingKind",
    "QuantumConfig",
    "QuantumEnvironment",
    "ENVIRONMENT_KINDS",
    "make_environment",
]
