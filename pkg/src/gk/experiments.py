"""Headline experiments: particle ensembles against their deterministic limit.

An experiment builds the wave-shaped initial profile around a front,
runs the particle ensemble and the discretized reaction-diffusion system
from the same data, and pairs both against a fixed battery of test
functions together with the exact sharp-interface step profile of the
shrinking circle.  All randomness derives from the configured seed, and
all numbers are written through repr so a seeded rerun is byte-identical.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .config import ConfigError, ExperimentConfig
from .front import (
    DistanceField,
    circle_radius,
    signed_distance_circle,
    signed_distance_stripe,
    sphere_extinction_time,
    wave_initial_profile,
)
from .hydro import HydroRun, integrate
from .kmc import EnsembleResult, InitialProfile, phi_samples, run_ensemble
from .lattice import ScalarField, TorusLattice
from .rates import validate
from .wave import WaveTable


def phi_battery(d: int):
    """Fixed test functions: the constant plus per-axis waves cos/sin(2 pi k v_j),
    k <= 3.  Returns [(name, callable on (n, d) arrays)]."""
    phis = [("const", lambda v: np.ones(np.asarray(v).shape[0]))]

    def make(kind, k, axis):
        fn = np.cos if kind == "cos" else np.sin
        return lambda v: fn(2.0 * math.pi * k * np.asarray(v)[:, axis])

    for axis in range(d):
        for k in (1, 2, 3):
            for kind in ("cos", "sin"):
                phis.append((f"{kind}{k}_x{axis + 1}", make(kind, k, axis)))
    return phis


def build_distance(config: ExperimentConfig, lattice: TorusLattice, t: float = 0.0) -> DistanceField:
    if config.front_kind == "circle":
        R = float(circle_radius(config.R0, t, config.d))
        return signed_distance_circle(config.center, R, lattice, config.d0)
    if config.front_kind == "stripe":
        return signed_distance_stripe(config.stripe_lo, config.stripe_hi, lattice, config.d0)
    raise ConfigError("constant initial data has no front")


def initial_profile(config: ExperimentConfig, waves: WaveTable, lattice: TorusLattice) -> ScalarField:
    if config.front_kind == "constant":
        return ScalarField.constant(lattice, config.constant_value)
    return wave_initial_profile(waves, build_distance(config, lattice), config.K)


def step_profile_pairing(
    config: ExperimentConfig, lattice: TorusLattice, t: float, phi
) -> float:
    """<step profile of the moving front, phi> on the lattice quadrature grid.

    The profile takes the lower stable root inside the front and the upper
    one outside.
    """
    prof = validate(config.spec)
    if config.front_kind == "circle":
        R = float(circle_radius(config.R0, t, config.d))
        coords = _lattice_points(lattice)
        diff = coords - np.asarray(config.center)
        diff -= np.round(diff)
        inside = (diff * diff).sum(axis=1) < R * R
    elif config.front_kind == "stripe":
        coords = _lattice_points(lattice)
        inside = (coords[:, 0] >= config.stripe_lo) & (coords[:, 0] <= config.stripe_hi)
    else:
        raise ConfigError("constant initial data has no front")
    vals = np.where(inside, prof.alpha1, prof.alpha2)
    return float(np.dot(vals, phi_samples(lattice, phi))) / lattice.site_count


def _lattice_points(lattice: TorusLattice) -> np.ndarray:
    return np.stack(
        np.meshgrid(*[np.arange(lattice.N)] * lattice.d, indexing="ij"), axis=-1
    ).reshape(-1, lattice.d) / lattice.N


@dataclass
class ExperimentReport:
    t_grid: np.ndarray
    phi_names: list[str]
    mean_pairings: np.ndarray  # (times, phis): ensemble mean of <alpha^N, phi>
    hydro_pairings: np.ndarray  # (times, phis)
    step_pairings: np.ndarray  # (times, phis); NaN without a front
    ensemble: EnsembleResult
    hydro: HydroRun

    def max_particle_hydro_deviation(self) -> float:
        return float(np.abs(self.mean_pairings - self.hydro_pairings).max())


def run_limit_experiment(
    config: ExperimentConfig, threads: int | None = None
) -> ExperimentReport:
    """Ensemble vs deterministic solution vs sharp-interface step profile."""
    if config.scaling == "sqrt-log":
        config.require_sqrt_log_guard()
    lattice = TorusLattice(config.d, config.N)
    waves = WaveTable(config.spec)
    if config.front_kind == "circle":
        t_ext = sphere_extinction_time(config.R0, config.d)
        if config.T >= t_ext:
            raise ConfigError(
                f"final time {config.T:g} is past extinction at {t_ext:g}"
            )
    u0 = initial_profile(config, waves, lattice)
    phis = phi_battery(config.d)
    names = [n for n, _ in phis]
    fns = [f for _, f in phis]

    ens = run_ensemble(
        InitialProfile(u0),
        config.spec,
        config.K,
        config.t_grid,
        config.runs,
        config.seed,
        phis=fns,
        threads=threads,
    )
    hyd = integrate(u0, config.spec, config.K, config.T, t_out=config.t_grid)
    phi_mat = np.stack([phi_samples(lattice, f) for f in fns])
    hydro_pairings = hyd.fields @ phi_mat.T / lattice.site_count
    mean_pairings = ens.pairings.mean(axis=0)
    step = np.full_like(hydro_pairings, np.nan)
    if config.front_kind != "constant":
        for i, t in enumerate(config.t_grid):
            for j, f in enumerate(fns):
                step[i, j] = step_profile_pairing(config, lattice, float(t), f)
    return ExperimentReport(
        np.asarray(config.t_grid, dtype=np.float64),
        names, mean_pairings, hydro_pairings, step, ens, hyd,
    )


@dataclass
class TailReport:
    t_grid: np.ndarray
    phi_names: list[str]
    epsilon: float
    frequencies: np.ndarray  # (times, phis): fraction of runs deviating > eps


def run_deviation_tail(
    config: ExperimentConfig, epsilon: float, threads: int | None = None
) -> TailReport:
    """Empirical frequency of |<alpha^N - u^N, phi>| > epsilon per (t, phi)."""
    if config.runs < 200:
        raise ConfigError("tail estimation needs at least 200 runs")
    report = run_limit_experiment(config, threads=threads)
    dev = np.abs(report.ensemble.pairings - report.hydro_pairings[None, :, :])
    freq = (dev > epsilon).mean(axis=0)
    return TailReport(report.t_grid, report.phi_names, epsilon, freq)


# --- delimited output ---------------------------------------------------------


def write_csv(path, header: str, rows) -> None:
    """CSV with repr-formatted floats (bitwise reproducible)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(
                ",".join(
                    repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)
                    for v in row
                )
                + "\n"
            )


def write_pairings_csv(path, ens: EnsembleResult, phi_names) -> None:
    rows = []
    for r in range(ens.pairings.shape[0]):
        for i, t in enumerate(ens.t_grid):
            for j, name in enumerate(phi_names):
                rows.append((r, float(t), name, float(ens.pairings[r, i, j])))
    write_csv(path, "run,t,phi_id,value", rows)


def write_site_means_csv(path, ens: EnsembleResult) -> None:
    rows = []
    for i, t in enumerate(ens.t_grid):
        for s in range(ens.site_means.shape[1]):
            rows.append((float(t), s, float(ens.site_means[i, s])))
    write_csv(path, "t,site,mean", rows)


def write_experiment_report_csv(path, report: ExperimentReport) -> None:
    rows = []
    for i, t in enumerate(report.t_grid):
        for j, name in enumerate(report.phi_names):
            rows.append(
                (
                    float(t),
                    name,
                    float(report.mean_pairings[i, j]),
                    float(report.hydro_pairings[i, j]),
                    float(report.step_pairings[i, j]),
                    float(abs(report.mean_pairings[i, j] - report.hydro_pairings[i, j])),
                )
            )
    write_csv(
        path,
        "t,phi_id,mean_pairing,hydro_pairing,step_pairing,particle_hydro_deviation",
        rows,
    )


def default_threads() -> int | None:
    v = os.environ.get("GK_THREADS")
    return int(v) if v else None
