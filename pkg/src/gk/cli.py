"""Command-line entry point.

Subcommands: simulate, hydro, wave, mmc, sandwich, verify, experiment.
All take --config FILE --seed S --out DIR; exit code 0 means every
assertion passed, 1 a numerical violation, 2 a configuration error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import entropy
from .config import ConfigError, ExperimentConfig, load_config
from .front import (
    EmptyFrontError,
    ExtinctionError,
    circle_radius,
    calibrate_envelope,
    extract_interface,
    sandwich_check,
    sharp_front_profile,
    sphere_extinction_time,
    wave_initial_profile,
)
from .hydro import energy_report, gradient_report, integrate
from .kmc import InitialProfile, run_ensemble, sample_initial
from .lattice import (
    Configuration,
    ScalarField,
    TorusLattice,
    sup_gradient_norm,
    write_field_csv,
    write_snapshot,
)
from .rates import REFERENCE_SPEC_1D, validate
from .experiments import (
    build_distance,
    default_threads,
    initial_profile,
    phi_battery,
    run_limit_experiment,
    write_csv,
    write_experiment_report_csv,
    write_pairings_csv,
    write_site_means_csv,
)
from .wave import WaveTable, solve_wave


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gk",
        description="Interacting-particle and reaction-diffusion experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("simulate", "sample paths of the particle system"),
        ("hydro", "integrate the discretized reaction-diffusion system"),
        ("wave", "solve the traveling-wave profile"),
        ("mmc", "interface radius against the exact shrinking circle"),
        ("sandwich", "envelope bounds around a hydro trajectory"),
        ("verify", "run the identity suite"),
        ("experiment", "full ensemble-versus-limit experiment"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=name != "verify", help="config file")
        p.add_argument("--seed", type=int, default=None, help="override the seed")
        p.add_argument("--out", required=True, help="output directory")
        if name == "simulate":
            p.add_argument("--runs", type=int, default=None)
            p.add_argument("--t-grid", default=None, help="comma-separated times")
            p.add_argument(
                "--snapshots", action="store_true", help="dump configurations"
            )
    args = parser.parse_args(argv)

    try:
        os.makedirs(args.out, exist_ok=True)
        config = None
        if args.config:
            config = load_config(args.config)
            if args.seed is not None:
                config.seed = args.seed
        handler = {
            "simulate": _cmd_simulate,
            "hydro": _cmd_hydro,
            "wave": _cmd_wave,
            "mmc": _cmd_mmc,
            "sandwich": _cmd_sandwich,
            "verify": _cmd_verify,
            "experiment": _cmd_experiment,
        }[args.command]
        return handler(config, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ExtinctionError, EmptyFrontError) as exc:
        print(f"violation: {exc}", file=sys.stderr)
        return 1


def _grid(config: ExperimentConfig, args):
    if getattr(args, "t_grid", None):
        try:
            grid = np.asarray(
                [float(t) for t in args.t_grid.split(",")], dtype=np.float64
            )
        except ValueError as exc:
            raise ConfigError(f"bad --t-grid {args.t_grid!r}") from exc
        if grid.size == 0 or np.any(np.diff(grid) <= 0) or grid[0] < 0:
            raise ConfigError("--t-grid must be increasing and nonnegative")
        return grid
    return config.t_grid


def _cmd_simulate(config: ExperimentConfig, args) -> int:
    lattice = TorusLattice(config.d, config.N)
    waves = WaveTable(config.spec)
    u0 = initial_profile(config, waves, lattice)
    t_grid = _grid(config, args)
    runs = args.runs if args.runs is not None else config.runs
    phis = phi_battery(config.d)
    ens = run_ensemble(
        InitialProfile(u0),
        config.spec,
        config.K,
        t_grid,
        runs,
        config.seed,
        phis=[f for _, f in phis],
        threads=default_threads(),
    )
    write_pairings_csv(os.path.join(args.out, "pairings.csv"), ens, [n for n, _ in phis])
    write_site_means_csv(os.path.join(args.out, "site_means.csv"), ens)
    if args.snapshots:
        cfg = sample_initial(InitialProfile(u0), config.seed)
        from .kmc import SimState, advance_grid

        state = SimState(cfg, config.spec, config.K, seed=config.seed)
        for t, snap in zip(t_grid, advance_grid(state, t_grid)):
            write_snapshot(
                os.path.join(args.out, f"snapshot_t{t:g}.txt"), snap, float(t), config.seed
            )
    return 0


def _hydro_rows(run, config: ExperimentConfig):
    """Per-time report rows (t, sup_gradient, energy_lhs, energy_rhs)."""
    rows = []
    worst = 0.0
    for i, t in enumerate(run.t_out):
        sub = run.fields[: i + 1]
        import dataclasses

        partial = dataclasses.replace(run, t_out=run.t_out[: i + 1], fields=sub)
        er = energy_report(partial)
        sg = sup_gradient_norm(run.field_at(i))
        rows.append((float(t), sg, er.lhs, er.rhs))
        if not er.holds:
            worst = max(worst, er.lhs - er.rhs)
    return rows, worst


def _cmd_hydro(config: ExperimentConfig, args) -> int:
    lattice = TorusLattice(config.d, config.N)
    waves = WaveTable(config.spec)
    u0 = initial_profile(config, waves, lattice)
    t_out = config.t_grid
    if t_out[0] > 0.0:
        t_out = np.concatenate([[0.0], t_out])
    run = integrate(u0, config.spec, config.K, config.T, t_out=t_out)
    for i, t in enumerate(run.t_out):
        write_field_csv(os.path.join(args.out, f"field_t{t:g}.csv"), run.field_at(i))
    rows, energy_gap = _hydro_rows(run, config)
    write_csv(
        os.path.join(args.out, "hydro_report.csv"),
        "t,sup_gradient,energy_lhs,energy_rhs",
        rows,
    )
    C0 = sup_gradient_norm(u0) / max(config.K, 1e-12)
    grad = gradient_report(run, C0 * (1 + 1e-9), config.K)
    if energy_gap > 0.0:
        print(f"violation: energy inequality fails by {energy_gap:g}", file=sys.stderr)
        return 1
    if not np.isfinite(grad.fitted_C):
        print("violation: gradient growth unbounded", file=sys.stderr)
        return 1
    return 0


def _cmd_wave(config: ExperimentConfig, args) -> int:
    spec = config.spec if config is not None else REFERENCE_SPEC_1D
    sol = solve_wave(spec)
    write_csv(
        os.path.join(args.out, "wave_profile.csv"),
        "z,U",
        zip(sol.z, sol.U),
    )
    return 0 if sol.residual() < 1e-6 else 1


def _cmd_mmc(config: ExperimentConfig, args) -> int:
    if config.d != 2 or config.front_kind != "circle":
        raise ConfigError("the curvature-limit run needs d = 2 and a circle front")
    lattice = TorusLattice(config.d, config.N)
    prof = validate(config.spec)
    # bulk sits exactly at the stable roots so the extracted radius is
    # not biased by profile tails wrapping around the torus
    u0 = sharp_front_profile(
        prof.alpha1, prof.alpha2, config.center, config.R0, lattice
    )
    run = integrate(u0, config.spec, config.K, config.T, t_out=config.t_grid)
    rows = []
    for i, t in enumerate(run.t_out):
        front = extract_interface(run.field_at(i), prof.alpha_star)
        write_csv(
            os.path.join(args.out, f"front_t{t:g}.csv"),
            "v1,v2",
            front.vertices,
        )
        rows.append(
            (
                float(t),
                front.mean_radius(config.center),
                float(circle_radius(config.R0, float(t), config.d)),
            )
        )
    write_csv(os.path.join(args.out, "radius.csv"), "t,extracted_R,exact_R", rows)
    return 0


def _cmd_sandwich(config: ExperimentConfig, args) -> int:
    if config.d != 2 or config.front_kind != "circle":
        raise ConfigError("envelope runs need d = 2 and a circle front")
    config.require_growth_guard()
    lattice = TorusLattice(config.d, config.N)
    waves = WaveTable(config.spec)
    dist = build_distance(config, lattice)
    u0 = wave_initial_profile(waves, dist, config.K)
    if config.T >= sphere_extinction_time(config.R0, config.d):
        raise ConfigError("final time is past front extinction")
    t_out = config.t_grid
    if t_out[0] > 0.0:
        t_out = np.concatenate([[0.0], t_out])
    run = integrate(u0, config.spec, config.K, config.T, t_out=t_out)

    def radius(t):
        return float(circle_radius(config.R0, t, config.d))

    m2, m3 = calibrate_envelope(
        run, waves, radius, config.center, config.K, config.env_a,
        config.d0, config.env_beta,
        m2_start=config.env_m2, m3_start=config.env_m3,
    )
    report = sandwich_check(
        run, waves, radius, config.center, config.K, config.env_a,
        m2, m3, config.d0, config.env_beta,
    )
    write_csv(
        os.path.join(args.out, "sandwich_report.csv"),
        "t,max_violation_lo,max_violation_hi",
        zip(report.t, report.violation_lo, report.violation_hi),
    )
    return 0 if report.max_violation() <= 1e-3 else 1


def _cmd_verify(config, args) -> int:
    """Identity suite on small lattices; one row per check."""
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    rows = []

    prof = validate(REFERENCE_SPEC_1D)
    res = max(
        abs(prof.alpha1 - 0.25), abs(prof.alpha_star - 0.5), abs(prof.alpha2 - 0.75)
    )
    rows.append(("rate_algebra", res, res <= 1e-10))

    lat = TorusLattice(1, 5)
    spec = REFERENCE_SPEC_1D
    QK = entropy.kawasaki_generator(lat)
    QG = entropy.glauber_generator(lat, spec)
    worst_k = worst_g = worst_c = 0.0
    for _ in range(10):
        u = ScalarField(lat, 0.2 + 0.6 * rng.random(lat.site_count))
        cfg = Configuration(lat, rng.integers(0, 2, lat.site_count).astype(np.uint8))
        nu = entropy.ProductMeasure(u)
        worst_k = max(
            worst_k,
            abs(entropy.adjoint_kawasaki_one(u, cfg) - entropy.brute_force_adjoint(QK, nu, cfg)),
        )
        g = entropy.adjoint_glauber_one(spec, u, cfg)
        worst_g = max(
            worst_g,
            abs(g["direct"] - entropy.brute_force_adjoint(QG, nu, cfg)),
            abs(g["direct"] - g["F"] - g["linear"]),
        )
        from .lattice import laplacian_grid
        from .rates import reaction_field

        dudt = laplacian_grid(u.grid(), lat.N).ravel() / lat.N**2 * 1.5 + 2.0 * reaction_field(spec, u)
        worst_c = max(worst_c, entropy.cor26_residual(spec, u, dudt, cfg, 1.5, 2.0))
    rows.append(("adjoint_exchange", worst_k, worst_k <= 1e-10))
    rows.append(("adjoint_flip", worst_g, worst_g <= 1e-10))
    rows.append(("quadratic_remainder", worst_c, worst_c <= 1e-9))

    worst_f = 0.0
    cost_rows = []
    for d, ells in ((1, (2, 4, 8, 16, 32, 64)), (2, (2, 4, 8, 16)), (3, (2, 4, 8))):
        for ell in ells:
            flow = entropy.flow_construct(ell, d)
            worst_f = max(worst_f, float(np.abs(flow.target_discrepancy()).max()))
            cost_rows.append((d, ell, entropy.flow_cost(flow)))
    rows.append(("flow_divergence", worst_f, worst_f <= 1e-12))
    write_csv(os.path.join(args.out, "flow_cost.csv"), "d,ell,cost", cost_rows)

    lat32 = TorusLattice(1, 32)
    worst_h = 0.0
    for _ in range(5):
        u = ScalarField(lat32, 0.2 + 0.6 * rng.random(lat32.site_count))
        cfg = Configuration(lat32, rng.integers(0, 2, lat32.site_count).astype(np.uint8))
        hk = entropy.h_field_identity(spec, u, cfg, 2, rng=rng)
        worst_h = max(worst_h, hk.residual, hk.exchange_invariance_error)
    rows.append(("h_field", worst_h, worst_h <= 1e-9))

    margin = -1e18
    for n in (10, 50, 100):
        sigma2 = float(n)  # unit intervals
        for frac in (0.25, 0.5, 1.0):
            gamma = frac / sigma2
            lhs = entropy.binomial_square_lmgf(n, gamma)
            margin = max(margin, lhs - 2.0 * gamma * sigma2)
    rows.append(("concentration", margin, margin <= 0.0))

    write_csv(
        os.path.join(args.out, "verify_report.csv"),
        "check_name,max_residual,pass",
        [(name, val, int(ok)) for name, val, ok in rows],
    )
    return 0 if all(ok for _, _, ok in rows) else 1


def _cmd_experiment(config: ExperimentConfig, args) -> int:
    report = run_limit_experiment(config, threads=default_threads())
    write_experiment_report_csv(os.path.join(args.out, "experiment_report.csv"), report)
    write_pairings_csv(
        os.path.join(args.out, "pairings.csv"), report.ensemble, report.phi_names
    )
    write_site_means_csv(os.path.join(args.out, "site_means.csv"), report.ensemble)
    return 0


if __name__ == "__main__":
    sys.exit(main())
