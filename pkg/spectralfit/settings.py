#!/usr/bin/env python3
"""
Settings loader for config/settings.yaml.
Values in the file override the built-in defaults key by key; a missing file
or key keeps the default.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

from .schema import (
    DEFAULT_ARMIJO_SIGMA,
    DEFAULT_COMPLETION_TOL,
    DEFAULT_LAMBDA_TOL,
    DEFAULT_MAX_BISECTIONS,
    DEFAULT_MAX_HALVINGS,
    DEFAULT_MAX_ITERS,
    DEFAULT_MU_TILDE,
    DEFAULT_REL_TOL,
    DEFAULT_TOL_FACTOR,
    ArmijoRule,
    CompletionConfig,
    FixedStep,
    SolverConfig,
    StepMode,
)

logger = logging.getLogger(__name__)

DEFAULT_SETTINGS_PATH = Path(__file__).parent / "config" / "settings.yaml"
STEP_MODES = ("fixed", "armijo")

DEFAULTS: Dict[str, Any] = {
    "solver": {
        "tol_factor": DEFAULT_TOL_FACTOR,
        "rel_tol": DEFAULT_REL_TOL,
        "max_iters": DEFAULT_MAX_ITERS,
        "step": "fixed",
        "mu": 1.0,
        "armijo": {
            "sigma": DEFAULT_ARMIJO_SIGMA,
            "mu_tilde": DEFAULT_MU_TILDE,
            "max_halvings": DEFAULT_MAX_HALVINGS,
        },
    },
    "completion": {
        "norm": "nuclear",
        "tol": DEFAULT_COMPLETION_TOL,
        "lambda_tol": DEFAULT_LAMBDA_TOL,
        "max_bisections": DEFAULT_MAX_BISECTIONS,
    },
    "corruption": {"square": 3, "fraction": 0.18, "seed": 0},
    "logging": {"level": "INFO", "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s"},
}


@dataclass(frozen=True)
class Settings:
    tol_factor: float
    rel_tol: float
    max_iters: int
    step: str
    mu: float
    armijo_sigma: float
    armijo_mu_tilde: float
    armijo_max_halvings: int
    norm: str
    completion_tol: float
    lambda_tol: float
    max_bisections: int
    square: int
    fraction: float
    seed: int
    log_level: str
    log_format: str

    def __post_init__(self):
        if self.step not in STEP_MODES:
            raise ValueError(f"Unknown step mode '{self.step}', expected one of {', '.join(STEP_MODES)}")

    def step_mode(self, step: Optional[str] = None, mu: Optional[float] = None) -> StepMode:
        """Build the step mode, letting explicit arguments override the file."""
        step = step or self.step
        if step == "armijo":
            return ArmijoRule(sigma=self.armijo_sigma, mu_tilde=self.armijo_mu_tilde,
                              max_halvings=self.armijo_max_halvings)
        if step != "fixed":
            raise ValueError(f"Unknown step mode '{step}', expected one of {', '.join(STEP_MODES)}")
        return FixedStep(mu=self.mu if mu is None else mu)

    def solver_config(self, step: Optional[str] = None, mu: Optional[float] = None,
                      tol: Optional[float] = None, max_iters: Optional[int] = None) -> SolverConfig:
        """tol=None keeps the per-problem default scaled by tol_factor."""
        return SolverConfig(step_mode=self.step_mode(step, mu), tol=tol, rel_tol=self.rel_tol,
                            max_iters=self.max_iters if max_iters is None else max_iters,
                            tol_factor=self.tol_factor)

    def completion_config(self, norm: Optional[str] = None, k: Optional[int] = None,
                          tol: Optional[float] = None, lambda_tol: Optional[float] = None,
                          solver: Optional[SolverConfig] = None) -> CompletionConfig:
        return CompletionConfig(
            norm=norm or self.norm,
            k=k,
            tol=self.completion_tol if tol is None else tol,
            lambda_tol=self.lambda_tol if lambda_tol is None else lambda_tol,
            max_bisections=self.max_bisections,
            solver=solver or self.solver_config(),
        )


def _merge(defaults: Dict[str, Any], overrides: Any) -> Dict[str, Any]:
    merged = dict(defaults)
    if not isinstance(overrides, dict):
        return merged
    for key, value in overrides.items():
        if key in defaults and isinstance(defaults[key], dict):
            merged[key] = _merge(defaults[key], value)
        elif key in defaults:
            merged[key] = value
        else:
            logger.warning(f"[CONFIG] Ignoring unknown setting '{key}'")
    return merged


def load_settings(path: Optional[Union[str, Path]] = None) -> Settings:
    """Load settings from path (default: the packaged settings.yaml)."""
    source = Path(path) if path is not None else DEFAULT_SETTINGS_PATH
    raw: Any = {}
    if source.is_file():
        with open(source, "r", encoding="utf-8") as f:
            raw = yaml.safe_load(f) or {}
    elif path is not None:
        raise FileNotFoundError(f"Settings file not found: {source}")
    else:
        logger.debug(f"[CONFIG] {source} not found, using built-in defaults")

    data = _merge(DEFAULTS, raw)
    solver, completion = data["solver"], data["completion"]
    corruption, log = data["corruption"], data["logging"]
    return Settings(
        tol_factor=float(solver["tol_factor"]),
        rel_tol=float(solver["rel_tol"]),
        max_iters=int(solver["max_iters"]),
        step=str(solver["step"]),
        mu=float(solver["mu"]),
        armijo_sigma=float(solver["armijo"]["sigma"]),
        armijo_mu_tilde=float(solver["armijo"]["mu_tilde"]),
        armijo_max_halvings=int(solver["armijo"]["max_halvings"]),
        norm=str(completion["norm"]),
        completion_tol=float(completion["tol"]),
        lambda_tol=float(completion["lambda_tol"]),
        max_bisections=int(completion["max_bisections"]),
        square=int(corruption["square"]),
        fraction=float(corruption["fraction"]),
        seed=int(corruption["seed"]),
        log_level=str(log["level"]).upper(),
        log_format=str(log["format"]),
    )
