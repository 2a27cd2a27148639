"""Seeded experiment grids with CSV emission.

Grid cells are independent given their (seed, n, gamma) key and could be
farmed out to workers; rows are always written in sorted key order, so the
output never depends on completion order.  All floats are written with 17
significant digits, which round-trips float64 exactly.
"""

from __future__ import annotations

import csv
import json
import math
import platform
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import ExperimentConfig
from .eigenbounds import concentration, eigenvalue_envelopes, empirical_spectrum
from .kernels import KernelSpec, cross_gram, gram
from .krr import GramSolver, estimate_bias, estimate_variance, risk_bounds
from .spectrum import mercer_spectrum
from .sphere import harmonic_dim_cumulative, sample_disk, sample_sphere

RISK_COLUMNS = ("seed", "n", "d", "gamma", "sigma_eps", "bias", "bias_se",
                "variance", "variance_se", "v_bound", "b_bound", "rho", "k")
EIGEN_COLUMNS = ("seed", "n", "d", "k", "i", "mu_i", "upper_k", "lower_k", "rho")
CURVE_COLUMNS = ("kernel", "d", "n", "variance_median", "ci_lo", "ci_hi", "seeds")
DISK_COLUMNS = ("n", "variance_median", "ci_lo", "ci_hi", "seeds")
ERROR_COLUMNS = ("seed", "n", "gamma", "error")

_BOOTSTRAP_SEED = 1859


def fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def bootstrap_ci(values, seed=_BOOTSTRAP_SEED, resamples=1000, level=0.95):
    """Percentile bootstrap interval for the median of ``values``."""
    values = np.asarray(values, dtype=float)
    rng = np.random.default_rng(seed)
    medians = np.median(
        values[rng.integers(0, values.size, size=(resamples, values.size))], axis=1)
    lo, hi = np.percentile(medians, [50 * (1 - level), 100 - 50 * (1 - level)])
    return float(lo), float(hi)


def _train_points(d, n, seed):
    return sample_sphere(n, d, (int(seed), int(n), 0))


def _test_points(d, m, n, seed):
    return sample_sphere(m, d, (int(seed), int(n), 1))


def _noise(n, seed, sigma):
    rng = np.random.default_rng((int(seed), int(n), 2))
    return sigma * rng.standard_normal(n)


def run(config: ExperimentConfig, out_dir) -> int:
    """Execute every grid cell of a config; returns the number of failed cells.

    Emits risk.csv, eigen.csv, spectrum.csv, manifest.json and, when any
    cell fails, errors.csv; failures do not stop the remaining cells.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    profile = mercer_spectrum(config.kernel, config.d, config.l_max)
    k = config.k if config.k is not None else harmonic_dim_cumulative(config.d, 1)
    risk_rows, eigen_rows, error_rows = [], [], []
    for seed in sorted(config.seeds):
        for n in sorted(config.n_values):
            for gamma in sorted(config.gamma_values):
                try:
                    risk_rows.append(_risk_cell(config, profile, k, seed, n, gamma))
                    eigen_rows.extend(_eigen_cell(config, profile, k, seed, n, gamma))
                except Exception as err:  # noqa: BLE001 - cell isolation is the contract
                    error_rows.append((seed, n, gamma, f"{type(err).__name__}: {err}"))
    write_csv(out / "risk.csv", RISK_COLUMNS, risk_rows)
    write_csv(out / "eigen.csv", EIGEN_COLUMNS, eigen_rows)
    header, rows = profile.csv_rows()
    write_csv(out / "spectrum.csv", header, rows)
    if error_rows:
        write_csv(out / "errors.csv", ERROR_COLUMNS, error_rows)
    _write_manifest(out, config, ["risk.csv", "eigen.csv", "spectrum.csv"]
                    + (["errors.csv"] if error_rows else []))
    return len(error_rows)


def _risk_cell(config, profile, k, seed, n, gamma):
    d = config.d
    X = _train_points(d, n, seed)
    T = _test_points(d, config.m_test, n, seed)
    variance, variance_se = estimate_variance(
        config.kernel, X, gamma, config.sigma_eps, T)
    if config.target is not None:
        bias, bias_se = estimate_bias(config.kernel, X, config.target, gamma, T)
    else:
        bias, bias_se = 0.0, 0.0
    rho_report = concentration(config.kernel, X, profile, k, gamma)
    bounds = risk_bounds(profile, n, k, gamma, rho_report.rho, config.sigma_eps,
                         delta=config.delta, target=config.target,
                         constants=config.constants)
    return (seed, n, d, gamma, config.sigma_eps, bias, bias_se,
            variance, variance_se, bounds.v_bound, bounds.b_bound,
            rho_report.rho, k)


def _eigen_cell(config, profile, k, seed, n, gamma):
    d = config.d
    X = _train_points(d, n, seed)
    mu = empirical_spectrum(gram(config.kernel, X), n)
    k_eff = min(k, n)
    env = eigenvalue_envelopes(profile, n, k_eff, config.k_prime,
                               delta=config.delta, constants=config.constants)
    rho = concentration(config.kernel, X, profile, k, gamma).rho if k < n else math.nan
    return [(seed, n, d, k_eff, i + 1, float(mu[i]), env.upper, env.lower, rho)
            for i in range(n)]


def _write_manifest(out: Path, config: ExperimentConfig, files) -> None:
    manifest = {
        "config_hash": config.config_hash(),
        "config_text": config.text,
        "seeds": list(config.seeds),
        "constants": config.constants.as_tuple(),
        "outputs": files,
        "versions": {
            "krrlab": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))


# -- figure protocols -----------------------------------------------------------

def fig1_kernel(name: str, d: int) -> KernelSpec:
    """The two high-dimensional showcase kernels: poly3 and ntk3."""
    if name == "poly3":
        return KernelSpec.polynomial(3, inner_scale=1.0 / d, offset=1.0)
    if name == "ntk3":
        return KernelSpec.ntk(3)
    raise ValueError(f"unknown fig1 kernel {name!r} (expected poly3 or ntk3)")


def noise_fit_variance(spec, X, T, noise, interpolator="pseudoinverse",
                       zonal=False) -> float:
    """Mean squared test prediction of a min-norm fit to pure-noise labels."""
    solver = GramSolver(gram(spec, X, zonal=zonal), 0.0, interpolator)
    preds = cross_gram(spec, T, X, zonal=zonal) @ solver.solve(noise)
    return float(np.mean(preds ** 2))


def multiple_descent_curves(kernel_name: str = "poly3",
                            d_values=(8, 16, 32),
                            n_values=tuple(2 ** j for j in range(3, 12)),
                            num_seeds: int = 20, sigma_eps: float = 1.0,
                            m_test: int = 1000):
    """Variance-versus-n rows for the multiple-descent experiment.

    The estimand per seed is the test MSE of the unregularized fit to pure
    noise; rows carry the median over seeds with a seeded percentile
    bootstrap band.
    """
    rows = []
    for d in sorted(d_values):
        spec = fig1_kernel(kernel_name, d)
        for n in sorted(n_values):
            values = []
            for seed in range(num_seeds):
                X = _train_points(d, n, seed)
                T = _test_points(d, m_test, n, seed)
                eps = _noise(n, seed, sigma_eps)
                values.append(noise_fit_variance(spec, X, T, eps))
            lo, hi = bootstrap_ci(values)
            rows.append((kernel_name, d, n, float(np.median(values)), lo, hi, num_seeds))
    return rows


def disk_variance_curves(n_values=(64, 128, 256, 512), num_seeds: int = 20,
                         sigma_eps: float = 1.0, m_test: int = 1000, depth: int = 3):
    """Median-variance rows for the fixed-low-dimension disk experiment.

    Inputs are uniform on the unit disk and the network kernel is applied
    in its zonal form.  The Gram matrices run far past float64
    conditioning, so the interpolator is a raw linear solve: a spectral
    cutoff would silently regularize away exactly the variance growth the
    experiment measures.  Medians (not means) summarize the seeds; single
    fits produce extreme values.
    """
    spec = KernelSpec.gpk(depth)
    rows = []
    for n in sorted(n_values):
        values = []
        for seed in range(num_seeds):
            X = sample_disk(n, (int(seed), int(n), 0))
            T = sample_disk(m_test, (int(seed), int(n), 1))
            eps = _noise(n, seed, sigma_eps)
            values.append(noise_fit_variance(spec, X, T, eps,
                                             interpolator="direct_solve", zonal=True))
        lo, hi = bootstrap_ci(values)
        rows.append((n, float(np.median(values)), lo, hi, num_seeds))
    return rows
