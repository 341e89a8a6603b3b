"""
Run one configured experiment end to end and write its result files:

    scan.csv      one row per sampling point
    summary.json  the config, J, mu_n, lambda_n, noise and versions
    plot.gp       a gnuplot script drawing scan.csv

With `save_matrix` the data matrix (and the background matrix of
sign-changing runs) is written next to them for later replay.
"""

import csv
import json
import logging
import os
import platform
import time
from dataclasses import dataclass

import numpy as np
import scipy

from . import __version__
from .forward import (
    add_noise,
    assemble_data_matrix,
    assemble_sign_changing,
    background_profile,
)
from .inverse import default_filter, scan
from .pswf import select_index_set, solve_pswf
from .quadrature import lgl_rule
from .utils import format_float

LOGGER = logging.getLogger("prolate_sampling.runner")

SCAN_COLUMNS = (
    "z",
    "raw_lsm_re",
    "raw_lsm_im",
    "I_lsm",
    "I_glsm",
    "fm_sum",
    "I_diff",
    "q_avg_ref",
    "q_exact",
)


@dataclass(frozen=True)
class RunOutput:
    scan_path: str
    summary_path: str
    plot_path: str
    result: object
    summary: dict


def choose_index_set(config, basis):
    """J from `index_count` when pinned, else by the prolate-eigenvalue rule.

    The threshold is `by_prolate` when set, otherwise delta for noisy runs
    and `lambda_floor` for noiseless ones.
    """
    if config.index_count is not None:
        return np.arange(config.index_count)
    if config.by_prolate is not None:
        threshold = config.by_prolate
    elif config.delta > 0:
        threshold = config.delta
    else:
        threshold = config.lambda_floor
    index_set = select_index_set(basis, threshold)
    if index_set.size == 0:
        raise ValueError(
            f"no prolate eigenvalue exceeds {threshold:.3e}; the index set is empty"
        )
    return index_set


def write_scan_csv(result, path):
    with open(path, "w", newline="\n", encoding="utf-8") as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(SCAN_COLUMNS)
        for rec in result.records:
            writer.writerow(
                [
                    format_float(rec.z),
                    format_float(rec.raw_lsm.real),
                    format_float(rec.raw_lsm.imag),
                    format_float(rec.i_lsm.value),
                    format_float(rec.i_glsm.value),
                    format_float(rec.fm_sum),
                    format_float(None if rec.i_diff is None else rec.i_diff.value),
                    format_float(rec.q_avg_ref),
                    format_float(rec.q_exact),
                ]
            )


def write_summary(summary, path):
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(summary, fp, indent=2)
        fp.write("\n")


def write_plot_script(config, path, csv_name="scan.csv"):
    """Write a gnuplot script drawing the indicator against the references."""
    lines = [
        "# gnuplot script; run with `gnuplot -p plot.gp`",
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set xlabel 'z'",
        f"set title '{config.name}: c={config.c:g}, eps={config.epsilon:g}, "
        f"delta={config.delta:g}'",
        "set xrange [-1:1]",
    ]
    if config.mode == "sign_changing":
        lines.append(
            f"plot '{csv_name}' using 1:($4-{config.q_inf!r}) with linespoints "
            "title 'I(z) - q_inf', "
            "'' using 1:7 with linespoints title 'I(z) - I_inf(z)', "
            "'' using 1:8 with points title 'q_avg', "
            "'' using 1:9 with lines title 'q'"
        )
    else:
        lines.append(
            f"plot '{csv_name}' using 1:4 with linespoints title 'I(z)', "
            "'' using 1:8 with points title 'q_avg', "
            "'' using 1:9 with lines title 'q'"
        )
    with open(path, "w", encoding="utf-8") as fp:
        fp.write("\n".join(lines) + "\n")


def run(config, out_dir, progress=False):
    """Execute the pipeline PSWF -> data -> noise -> scan for `config`.

    Parameters
    ----------
    config : ExperimentConfig
        A validated configuration.
    out_dir : str
        Directory receiving scan.csv, summary.json and plot.gp.
    progress : bool
        Show a progress bar during the scan.

    Returns
    -------
    output : RunOutput
    """
    config.validate()
    start = time.perf_counter()
    os.makedirs(out_dir, exist_ok=True)

    basis = solve_pswf(config.c, config.basis_size, config.truncation)
    rule = lgl_rule(config.n_q)
    index_set = choose_index_set(config, basis)
    LOGGER.info("index set J has dimension %d", len(index_set))

    background = None
    bg_profile = None
    if config.mode == "sign_changing":
        clean, background = assemble_sign_changing(
            config.profile, config.q_inf, config.d_radius, basis, index_set, rule
        )
        bg_profile = background_profile(config.q_inf, config.d_radius)
    else:
        clean = assemble_data_matrix(config.profile, basis, index_set, rule)
    matrix = add_noise(clean, config.delta, config.seed)
    filt = default_filter(
        matrix, config.reg, config.alpha, from_noise=config.alpha_from_noise
    )

    result = scan(
        config.zs,
        config.epsilon,
        matrix,
        basis,
        index_set,
        filt,
        rule,
        profile=config.profile,
        background=background,
        background_profile=bg_profile,
        workers=config.workers,
        progress=progress,
    )

    scan_path = os.path.join(out_dir, "scan.csv")
    summary_path = os.path.join(out_dir, "summary.json")
    plot_path = os.path.join(out_dir, "plot.gp")
    write_scan_csv(result, scan_path)
    matrix_files = []
    if config.save_matrix:
        matrix.save(out_dir, "data_matrix")
        matrix_files.append("data_matrix")
        if background is not None:
            background.save(out_dir, "background_matrix")
            matrix_files.append("background_matrix")

    lam = basis.lambdas[index_set]
    relative = matrix.relative_noise(clean) if config.delta > 0 else 0.0
    summary = {
        "config": config.to_mapping(),
        "index_set": [int(j) for j in index_set],
        "dimension": int(len(index_set)),
        "mu": matrix.eigenvalues.tolist(),
        "retained_modes": result.n_terms,
        "lambda_re": lam.real.tolist(),
        "lambda_im": lam.imag.tolist(),
        "filter": {"kind": filt.kind.value, "alpha": filt.alpha},
        "noise": {
            "relative": relative,
            "absolute": relative * clean.spectral_norm(),
            "calibration": "relative to ||A||_2",
        },
        "matrix_files": matrix_files,
        "wall_time_s": time.perf_counter() - start,
        "versions": {
            "prolate_sampling": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }
    write_summary(summary, summary_path)
    write_plot_script(config, plot_path)
    LOGGER.info("wrote %s, %s and %s", scan_path, summary_path, plot_path)
    return RunOutput(
        scan_path=scan_path,
        summary_path=summary_path,
        plot_path=plot_path,
        result=result,
        summary=summary,
    )
