#!/usr/bin/env python3
"""
Command-line entry point for spectralfit.
Runs masked approximation, bisection completion, square-block corruption and
spectrum export as subcommands. Results go to standard output as key=value
lines, diagnostics to standard error.
Exit codes: 0 success, 1 runtime error, 2 no convergence, 64 usage error.
"""

import logging
import sys
from typing import Optional, Tuple

import click
import numpy as np

from .completion import CompletionResult, complete, completable_norm_bound
from .core import check_kyfan_order, norm
from .matrix_io import FORMATS, corrupt_squares, load_input, output_format, write_matrix, write_spectrum_csv
from .projections import constraint_measure
from .report import (
    emit,
    format_completion_report,
    format_corruption_report,
    format_solution_report,
    format_spectrum_report,
)
from .schema import COMPLETION_NORMS, CONSTRAINT_KINDS, create_constraint, encode_constraint
from .settings import STEP_MODES, Settings, load_settings
from .solver import solve_approximation

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2
EXIT_USAGE = 64

SETTINGS = load_settings()


class SpectralFitGroup(click.Group):
    """Click group that maps failures onto the exit-code contract."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args=args, prog_name=prog_name, complete_var=complete_var,
                              standalone_mode=False, **extra)
        except click.UsageError as e:
            e.show()
            sys.exit(EXIT_USAGE)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_ERROR)
        except click.ClickException as e:
            e.show()
            sys.exit(EXIT_ERROR)
        except (ValueError, OSError, np.linalg.LinAlgError) as e:
            logger.debug("[CLI] Command failed", exc_info=True)
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_ERROR)
        sys.exit(rv if isinstance(rv, int) else EXIT_OK)


def configure_logging(settings: Settings, verbose: bool) -> None:
    level = logging.DEBUG if verbose else getattr(logging, settings.log_level, logging.INFO)
    logging.basicConfig(level=level, format=settings.log_format, stream=sys.stderr, force=True)


def _settings(ctx: click.Context) -> Settings:
    return ctx.obj if isinstance(ctx.obj, Settings) else SETTINGS


def _parse_scales(text: Optional[str]) -> Optional[Tuple[float, ...]]:
    if text is None:
        return None
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got '{text}'", param_hint="--scales")


def _exit_status(converged: bool) -> int:
    return EXIT_OK if converged else EXIT_NOT_CONVERGED


input_option = click.option("--input", "-i", "input_path", required=True,
                            type=click.Path(dir_okay=False), help="Input matrix (CSV or PGM).")
mask_option = click.option("--mask", "mask_path", type=click.Path(dir_okay=False),
                           help="Mask CSV of observed 'i,j' pairs, intersected with the input's entries.")
output_option = click.option("--output", "-o", "output_path", required=True,
                             type=click.Path(dir_okay=False), help="Output file.")
input_format_option = click.option("--input-format", type=click.Choice(FORMATS),
                                   help="Input format (default: detected by magic number).")
format_option = click.option("--format", "fmt", type=click.Choice(FORMATS),
                             help="Output format (default: pgm for a .pgm suffix, else csv).")
step_option = click.option("--step", type=click.Choice(STEP_MODES),
                           help="Step rule.", show_default=SETTINGS.step)
mu_option = click.option("--mu", type=click.FloatRange(min=0, min_open=True),
                         help="Fixed step size.", show_default=str(SETTINGS.mu))
max_iters_option = click.option("--max-iters", type=click.IntRange(min=1),
                                help="Iteration cap per solve.", show_default=str(SETTINGS.max_iters))


@click.group(cls=SpectralFitGroup)
@click.option("--verbose", "-v", is_flag=True, help="Log every iteration to standard error.")
@click.option("--config", "config_path", type=click.Path(dir_okay=False),
              help="Settings YAML (default: the packaged config/settings.yaml).")
@click.pass_context
def cli(ctx: click.Context, verbose: bool, config_path: Optional[str]):
    """Masked low-rank approximation and matrix completion under spectral constraints."""
    settings = load_settings(config_path) if config_path else SETTINGS
    ctx.obj = settings
    configure_logging(settings, verbose)


@cli.command()
@input_option
@mask_option
@output_option
@click.option("--constraint", "kind", required=True, type=click.Choice(CONSTRAINT_KINDS),
              help="Constraint set to approximate in.")
@click.option("--lambda", "lam", type=float, help="Ball radius (frobenius, spectral, nuclear, kyfan).")
@click.option("--k", type=click.IntRange(min=1), help="Ky-Fan order or rank bound.")
@click.option("--scales", help="Comma-separated column lengths for scaled-orthonormal.")
@click.option("--tol", type=click.FloatRange(min=0, min_open=True),
              help="Absolute masked-error tolerance.",
              show_default=f"{SETTINGS.tol_factor:g} * max(1, ||P_Omega M||_F)")
@max_iters_option
@step_option
@mu_option
@input_format_option
@format_option
@click.pass_context
def approx(ctx, input_path, mask_path, output_path, kind, lam, k, scales, tol, max_iters, step, mu,
           input_format, fmt):
    """Approximate the observed entries within a constraint set."""
    settings = _settings(ctx)
    try:
        constraint = create_constraint(kind, lam, k, _parse_scales(scales))
        cfg = settings.solver_config(step=step, mu=mu, tol=tol, max_iters=max_iters)
    except ValueError as e:
        raise click.UsageError(str(e), ctx=ctx)
    target_format = output_format(output_path, fmt)

    loaded = load_input(input_path, input_format, mask_path)
    try:
        constraint.validate_for(loaded.matrix.shape)
    except ValueError as e:
        raise click.UsageError(str(e), ctx=ctx)
    logger.info(f"[CLI] approx {input_path} constraint={encode_constraint(constraint)}")
    solution = solve_approximation(loaded.matrix, loaded.omega, constraint, cfg)
    write_matrix(output_path, solution.x, target_format)
    emit(format_solution_report(solution, constraint_measure(solution.x, constraint)))
    return _exit_status(solution.trace.converged)


@cli.command(name="complete")
@input_option
@mask_option
@output_option
@click.option("--norm", "norm_kind", type=click.Choice(COMPLETION_NORMS),
              help="Norm to minimize.", show_default=SETTINGS.norm)
@click.option("--k", type=click.IntRange(min=1), help="Ky-Fan order.")
@click.option("--tol", type=click.FloatRange(min=0, min_open=True),
              help="Admissible masked error.", show_default=str(SETTINGS.completion_tol))
@click.option("--lambda-tol", type=click.FloatRange(min=0, min_open=True),
              help="Admissible radius accuracy.", show_default=str(SETTINGS.lambda_tol))
@max_iters_option
@step_option
@mu_option
@input_format_option
@format_option
@click.pass_context
def complete_command(ctx, input_path, mask_path, output_path, norm_kind, k, tol, lambda_tol, max_iters, step,
                     mu, input_format, fmt):
    """Fill missing entries by bisection over the norm-ball radius."""
    settings = _settings(ctx)
    try:
        cfg = settings.completion_config(norm=norm_kind, k=k, tol=tol, lambda_tol=lambda_tol,
                                         solver=settings.solver_config(step=step, mu=mu, max_iters=max_iters))
    except ValueError as e:
        raise click.UsageError(str(e), ctx=ctx)
    target_format = output_format(output_path, fmt)

    loaded = load_input(input_path, input_format, mask_path)
    if loaded.omega.is_empty():
        raise ValueError(f"{input_path} has no observed entries")
    if cfg.norm == "kyfan":
        try:
            check_kyfan_order(cfg.k, min(loaded.matrix.shape))
        except ValueError as e:
            raise click.UsageError(str(e), ctx=ctx)
    observed_norm = completable_norm_bound(loaded.matrix, loaded.omega, cfg.norm, cfg.k)

    if loaded.omega.is_full():
        logger.info(f"[CLI] {input_path} has no missing entries, writing it unchanged")
        value = norm(loaded.matrix, cfg.norm, cfg.k)
        result = CompletionResult(x=loaded.matrix, lambda_star=value, converged=True, error=0.0, norm_value=value)
        write_matrix(output_path, result.x, target_format)
        emit(format_completion_report(result, observed_norm, fully_observed=True))
        return EXIT_OK

    logger.info(f"[CLI] complete {input_path} norm={cfg.norm} missing={loaded.omega.missing_fraction():.4f}")
    result = complete(loaded.matrix, loaded.omega, cfg)
    write_matrix(output_path, result.x, target_format)
    emit(format_completion_report(result, observed_norm))
    return _exit_status(result.converged)


@cli.command()
@input_option
@mask_option
@output_option
@click.option("--square", type=click.IntRange(min=1), help="Side of each removed block.",
              show_default=str(SETTINGS.square))
@click.option("--fraction", type=click.FloatRange(0, 1, min_open=True, max_open=True),
              help="Target missing fraction.", show_default=str(SETTINGS.fraction))
@click.option("--seed", type=int, help="Random seed.", show_default=str(SETTINGS.seed))
@input_format_option
@format_option
@click.pass_context
def corrupt(ctx, input_path, mask_path, output_path, square, fraction, seed, input_format, fmt):
    """Remove random square blocks; PGM output gets a sidecar mask file."""
    settings = _settings(ctx)
    square = settings.square if square is None else square
    fraction = settings.fraction if fraction is None else fraction
    seed = settings.seed if seed is None else seed
    target_format = output_format(output_path, fmt)

    loaded = load_input(input_path, input_format, mask_path)
    omega = corrupt_squares(loaded.matrix, square, fraction, seed).intersect(loaded.omega)
    written = write_matrix(output_path, loaded.matrix, target_format, omega)
    logger.info(f"[CLI] Wrote {', '.join(str(p) for p in written)}")
    emit(format_corruption_report(omega))
    return EXIT_OK


@cli.command()
@input_option
@output_option
@input_format_option
@click.pass_context
def spectrum(ctx, input_path, output_path, input_format):
    """Write the singular values of the input as index,value lines."""
    loaded = load_input(input_path, input_format)
    count = write_spectrum_csv(output_path, loaded.matrix)
    emit(format_spectrum_report(count))
    return EXIT_OK


def main():
    cli(prog_name="spectralfit")


if __name__ == "__main__":
    main()
