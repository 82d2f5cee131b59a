"""Kernelized Q-learning with optimistic exploration."""
from .agent import AgentConfig, KQLAgent, default_beta, default_lambda
from .features import KernelSpec, embed, kernel_eval
from .harness import RunConfig, RunLog, run_checks, run_experiment, run_regret, summarize
from .regressor import DualRegressor

__all__ = [
    "AgentConfig",
    "DualRegressor",
    "KQLAgent",
    "KernelSpec",
    "RunConfig",
    "RunLog",
    "default_beta",
    "default_lambda",
    "embed",
    "kernel_eval",
    "run_checks",
    "run_experiment",
    "run_regret",
    "summarize",
]
