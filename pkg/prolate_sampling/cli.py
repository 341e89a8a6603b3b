import logging
import os

import click

from .config import list_presets, resolve_config, PRESETS
from .pswf import solve_pswf, write_eigenvalue_table
from .runner import run as run_experiment
from .utils import setup_logging

LOGGER = logging.getLogger("prolate_sampling.cli")

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


@click.group(name="prolate-sampling")
def main():
    """Prolate-based linear sampling for the restricted Fourier operator."""


@main.command(name="run")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--preset", type=str, default=None)
@click.option(
    "--out", "out_dir", type=click.Path(), default="results", show_default=True
)
@click.option("--seed", type=int, default=None)
@click.option("--reg", type=click.Choice(["cutoff", "tikhonov"]), default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--quad", "n_q", type=int, default=None, help="LGL quadrature nodes.")
@click.option(
    "--by-prolate",
    type=float,
    default=None,
    help="Keep the leading modes with |lambda_n| above this threshold.",
)
@click.option(
    "--alpha-from-noise",
    is_flag=True,
    help="Cut noisy matrices at alpha = (delta ||A||)^2 instead of the floor.",
)
@click.option(
    "--save-matrix",
    is_flag=True,
    help="Also write the data matrix into the output directory.",
)
@click.option(
    "--set",
    "set_values",
    multiple=True,
    metavar="KEY=VALUE",
    help="Override any config key, e.g. --set profile.kind=oscillatory.",
)
@click.option(
    "--log-level",
    type=click.Choice(LOG_LEVELS, case_sensitive=False),
    default="INFO",
    show_default=True,
)
@click.option("--quiet", is_flag=True, help="Hide the progress bar.")
def run(
    config_path,
    preset,
    out_dir,
    seed,
    reg,
    alpha,
    n_q,
    by_prolate,
    alpha_from_noise,
    save_matrix,
    set_values,
    log_level,
    quiet,
):
    """Run one experiment and write scan.csv, summary.json and plot.gp."""
    setup_logging(level=log_level)
    try:
        config = resolve_config(
            preset=preset,
            path=config_path,
            overrides={
                "seed": seed,
                "reg": reg,
                "alpha": alpha,
                "n_q": n_q,
                "by_prolate": by_prolate,
                "alpha_from_noise": alpha_from_noise or None,
                "save_matrix": save_matrix or None,
            },
            set_values=set_values,
        )
    except ValueError as err:
        raise click.UsageError(f"invalid configuration: {err}") from err

    LOGGER.info("running `%s` into %s", config.name, out_dir)
    try:
        output = run_experiment(config, out_dir, progress=not quiet)
    except ValueError as err:
        raise click.ClickException(str(err)) from err
    click.echo(output.scan_path)
    click.echo(output.summary_path)


@main.command(name="presets")
@click.option("--verbose", is_flag=True, help="Also print each preset's settings.")
def presets(verbose):
    """List the experiment presets."""
    for name in list_presets():
        if verbose:
            settings = ", ".join(
                f"{key}={value}"
                for key, value in PRESETS[name].items()
                if key != "name"
            )
            click.echo(f"{name}: {settings}")
        else:
            click.echo(name)


@main.command(name="eigenvalues")
@click.option("--c", "c", type=float, required=True, help="Bandwidth.")
@click.option("--n", "n", type=int, required=True, help="Highest PSWF index.")
@click.option("--n-t", "n_t", type=int, default=None, help="Legendre truncation.")
@click.option(
    "--out", "out_path", type=click.Path(), default="eigenvalues.csv", show_default=True
)
@click.option(
    "--log-level",
    type=click.Choice(LOG_LEVELS, case_sensitive=False),
    default="INFO",
    show_default=True,
)
def eigenvalues(c, n, n_t, out_path, log_level):
    """Dump n, chi_n and lambda_n of the PSWF basis as CSV."""
    setup_logging(level=log_level)
    try:
        basis = solve_pswf(c, n, n_t)
    except ValueError as err:
        raise click.UsageError(str(err)) from err
    parent = os.path.dirname(out_path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    write_eigenvalue_table(basis, out_path)
    click.echo(out_path)
