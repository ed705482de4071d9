#!/usr/bin/env python3
"""
Result reporting for the command-line tools.
Formats solver, completion, corruption and spectrum results into flat
key=value records and streams them to standard output.
"""

import logging
from typing import Any, Dict

import click

from .completion import CompletionResult
from .core import ObservationSet
from .solver import ApproximationSolution

logger = logging.getLogger(__name__)


def format_value(value: Any) -> str:
    """Booleans as true/false, floats at full precision."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_solution_report(solution: ApproximationSolution, measure: float) -> Dict[str, Any]:
    trace = solution.trace
    return {
        "error": trace.final_error,
        "initial_error": trace.errors[0],
        "iterations": trace.iterations,
        "measure": float(measure),
        "converged": trace.converged,
    }


def format_completion_report(result: CompletionResult, observed_norm: float,
                             fully_observed: bool = False) -> Dict[str, Any]:
    report = {
        "lambda_star": float(result.lambda_star),
        "error": float(result.error),
        "bisections": result.bisections,
        "norm": float(result.norm_value),
        "observed_norm": float(observed_norm),
        "converged": result.converged,
    }
    if fully_observed:
        report["note"] = "fully_observed"
    return report


def format_corruption_report(omega: ObservationSet) -> Dict[str, Any]:
    return {
        "fraction": omega.missing_fraction(),
        "missing": omega.rows * omega.cols - len(omega),
    }


def format_spectrum_report(count: int) -> Dict[str, Any]:
    return {"count": count}


def emit(report: Dict[str, Any]) -> None:
    """Print one key=value line per field."""
    for key, value in report.items():
        click.echo(f"{key}={format_value(value)}")
    logger.debug(f"[CLI] Reported {len(report)} fields")
