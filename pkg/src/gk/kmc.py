"""Exact continuous-time simulation of the Glauber-Kawasaki process.

The generator is N^2 L_K + K L_G: every unordered nearest-neighbor bond
exchanges occupancies at rate N^2 (a no-op when both ends agree) and every
site flips at rate K c_x(eta).  Sampling is by thinning against constant
majorant rates: exchange proposals pick a directed edge uniformly at rate
N^2 d N^d total, flip proposals pick a site uniformly at rate
K c_max N^d total and accept with probability c_x(eta) / c_max.  Time is
macroscopic throughout (the N^2 and K factors live in the rates).

A test mode replaces the N^2 Kawasaki factor by an arbitrary value
(including 0, freezing exchanges) so that tiny lattices can be checked
against explicit generator matrices.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .lattice import Configuration, ScalarField, TorusLattice
from .rates import RateSpec


@njit(nogil=True, cache=True)
def _simulate_path(
    occ,
    t0,
    t_targets,
    snaps,
    nbr,
    off1,
    off2,
    ap,
    bp,
    cp,
    am,
    bm,
    cm,
    K,
    kaw,
    c_max,
    seed,
    counters,
):
    """Advance occ from t0, recording it at each target time.

    counters: [proposals, kawasaki_accepted, glauber_proposed, glauber_accepted].
    Returns the final time (== t_targets[-1]).
    """
    np.random.seed(seed)
    nsites = occ.shape[0]
    ndir = nbr.shape[0]
    r_swap = kaw * 0.5 * ndir * nsites
    r_flip = K * c_max * nsites
    r_tot = r_swap + r_flip
    t = t0
    it = 0
    nt = t_targets.shape[0]
    if r_tot <= 0.0:
        for k in range(nt):
            snaps[k] = occ
        return t_targets[nt - 1] if nt > 0 else t
    p_swap = r_swap / r_tot
    while it < nt:
        t_next = t - np.log(np.random.random()) / r_tot
        while it < nt and t_targets[it] < t_next:
            snaps[it] = occ
            it += 1
        if it >= nt:
            t = t_targets[nt - 1]
            break
        t = t_next
        counters[0] += 1
        if np.random.random() < p_swap:
            k = int(np.random.random() * ndir * nsites)
            if k >= ndir * nsites:
                k = ndir * nsites - 1
            x = k // ndir
            y = nbr[k % ndir, x]
            if occ[x] != occ[y]:
                tmp = occ[x]
                occ[x] = occ[y]
                occ[y] = tmp
                counters[1] += 1
        else:
            x = int(np.random.random() * nsites)
            if x >= nsites:
                x = nsites - 1
            e1 = occ[off1[x]]
            e2 = occ[off2[x]]
            if occ[x] == 0:
                c = ap * e1 * e2 + bp * e1 + cp
            else:
                c = am * e1 * e2 + bm * e1 + cm
            counters[2] += 1
            if np.random.random() * c_max < c:
                occ[x] = 1 - occ[x]
                counters[3] += 1
    return t


@njit(nogil=True, cache=True)
def _final_states_batch(
    occ0,
    t_end,
    nbr,
    off1,
    off2,
    ap,
    bp,
    cp,
    am,
    bm,
    cm,
    K,
    kaw,
    c_max,
    base_seed,
    n_runs,
    out_codes,
):
    """Many independent runs from occ0 to t_end; final states as bit codes."""
    nsites = occ0.shape[0]
    occ = np.empty(nsites, dtype=np.uint8)
    snaps = np.empty((1, nsites), dtype=np.uint8)
    targets = np.empty(1, dtype=np.float64)
    targets[0] = t_end
    counters = np.zeros(4, dtype=np.int64)
    for r in range(n_runs):
        occ[:] = occ0
        _simulate_path(
            occ,
            0.0,
            targets,
            snaps,
            nbr,
            off1,
            off2,
            ap,
            bp,
            cp,
            am,
            bm,
            cm,
            K,
            kaw,
            c_max,
            base_seed + r,
            counters,
        )
        code = 0
        for i in range(nsites):
            code = 2 * code + occ[i]
        out_codes[r] = code


@dataclass
class SimState:
    """One owned sample path: configuration, clock, rate spec and seed."""

    cfg: Configuration
    spec: RateSpec
    K: float
    t: float = 0.0
    seed: int = 0
    kawasaki_factor: float | None = None  # None -> N^2; 0 freezes exchanges
    counters: np.ndarray = field(default_factory=lambda: np.zeros(4, dtype=np.int64))
    calls: int = 0  # advances the RNG stream across successive advance() calls

    def __post_init__(self):
        if self.spec.d != self.cfg.lattice.d:
            raise ValueError("rate spec dimension does not match lattice")
        if self.kawasaki_factor is None:
            self.kawasaki_factor = float(self.cfg.lattice.N) ** 2
        if not np.isfinite(self.kawasaki_factor) or self.kawasaki_factor < 0:
            raise ValueError("kawasaki factor must be finite and >= 0")
        if not np.isfinite(self.K) or self.K < 0:
            raise ValueError("K must be finite and >= 0")


def _tables(lattice: TorusLattice, spec: RateSpec):
    return (
        lattice.neighbor_table(),
        lattice.shift_table(spec.n1),
        lattice.shift_table(spec.n2),
    )


def advance(state: SimState, t_target: float) -> SimState:
    """Exact sample path to t_target (in place; returns state)."""
    advance_grid(state, [float(t_target)])
    return state


def advance_grid(state: SimState, t_grid) -> list[Configuration]:
    """Advance through an increasing grid of times, returning snapshots."""
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if t_grid.size == 0:
        return []
    if t_grid[0] < state.t or np.any(np.diff(t_grid) < 0):
        raise ValueError("t_grid must be nondecreasing and start at >= state.t")
    lat = state.cfg.lattice
    nbr, off1, off2 = _tables(lat, state.spec)
    snaps = np.empty((t_grid.size, lat.site_count), dtype=np.uint8)
    s = state.spec
    kernel_seed = (state.seed * 1000003 + state.calls) % (2**31 - 1)
    state.calls += 1
    state.t = _simulate_path(
        state.cfg.occupancy,
        state.t,
        t_grid,
        snaps,
        nbr,
        off1,
        off2,
        s.a_plus,
        s.b_plus,
        s.c_plus,
        s.a_minus,
        s.b_minus,
        s.c_minus,
        state.K,
        state.kawasaki_factor,
        s.c_max(),
        kernel_seed,
        state.counters,
    )
    return [Configuration(lat, snaps[k].copy()) for k in range(t_grid.size)]


@dataclass(frozen=True)
class InitialProfile:
    """Initial site means; Bernoulli product initial law."""

    u0: ScalarField

    def __post_init__(self):
        v = self.u0.values
        if np.any(v < 0.0) or np.any(v > 1.0):
            raise ValueError("initial profile values must lie in [0, 1]")


def sample_initial(profile: InitialProfile, seed: int) -> Configuration:
    """Independent Bernoulli(u0(x)) occupancy per site, deterministic in seed."""
    rng = np.random.default_rng(np.random.Philox(seed))
    occ = (rng.random(profile.u0.values.shape) < profile.u0.values).astype(np.uint8)
    return Configuration(profile.u0.lattice, occ)


def empirical_pairing(cfg: Configuration, phi) -> float:
    """<alpha^N, phi> = N^-d sum_x eta_x phi(x/N)."""
    return float(np.dot(cfg.occupancy, phi_samples(cfg.lattice, phi))) / cfg.lattice.site_count


def phi_samples(lattice: TorusLattice, phi) -> np.ndarray:
    """phi evaluated at x/N for every site, in index order."""
    coords = np.stack(
        np.meshgrid(*[np.arange(lattice.N)] * lattice.d, indexing="ij"), axis=-1
    ).reshape(-1, lattice.d)
    return np.asarray(phi(coords / lattice.N), dtype=np.float64).ravel()


def field_pairing(u: ScalarField, phi) -> float:
    """<u, phi> = N^-d sum_x u_x phi(x/N) (step-function embedding)."""
    return float(np.dot(u.values, phi_samples(u.lattice, phi))) / u.lattice.site_count


@dataclass
class EnsembleResult:
    t_grid: np.ndarray
    pairings: np.ndarray  # (runs, times, phis)
    site_means: np.ndarray  # (times, site_count)


def run_ensemble(
    profile: InitialProfile,
    spec: RateSpec,
    K: float,
    t_grid,
    runs: int,
    base_seed: int,
    phis=(),
    kawasaki_factor: float | None = None,
    threads: int | None = None,
) -> EnsembleResult:
    """Independent sample paths with derived seeds base_seed + i.

    Returns per-run pairings against each test function and the across-run
    average occupancy per site at every grid time.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    t_grid = np.asarray(t_grid, dtype=np.float64)
    lat = profile.u0.lattice
    phi_mats = (
        np.stack([phi_samples(lat, phi) for phi in phis])
        if phis
        else np.zeros((0, lat.site_count))
    )
    pairings = np.zeros((runs, t_grid.size, phi_mats.shape[0]))
    mean_acc = np.zeros((t_grid.size, lat.site_count))

    def one_run(i):
        cfg = sample_initial(profile, base_seed + i)
        state = SimState(
            cfg, spec, K, seed=base_seed + i, kawasaki_factor=kawasaki_factor
        )
        snaps = advance_grid(state, t_grid)
        occ = np.stack([s.occupancy for s in snaps]).astype(np.float64)
        return i, occ

    if threads is None:
        threads = int(os.environ.get("GK_THREADS", "0")) or (os.cpu_count() or 1)
    results = []
    if threads > 1 and runs > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one_run, range(runs)))
    else:
        results = [one_run(i) for i in range(runs)]
    # deterministic merge by run index, not completion order
    for i, occ in sorted(results):
        if phi_mats.shape[0]:
            pairings[i] = occ @ phi_mats.T / lat.site_count
        mean_acc += occ
    mean_acc /= runs
    return EnsembleResult(t_grid, pairings, mean_acc)


def final_state_distribution(
    cfg0: Configuration,
    spec: RateSpec,
    K: float,
    t_end: float,
    runs: int,
    base_seed: int,
    kawasaki_factor: float | None = None,
) -> np.ndarray:
    """Empirical law over all 2^{N^d} states after time t_end (small lattices)."""
    lat = cfg0.lattice
    if lat.site_count > 20:
        raise ValueError("state space too large to tabulate")
    nbr, off1, off2 = _tables(lat, spec)
    kaw = float(lat.N) ** 2 if kawasaki_factor is None else float(kawasaki_factor)
    codes = np.empty(runs, dtype=np.int64)
    s = spec
    _final_states_batch(
        cfg0.occupancy,
        t_end,
        nbr,
        off1,
        off2,
        s.a_plus,
        s.b_plus,
        s.c_plus,
        s.a_minus,
        s.b_minus,
        s.c_minus,
        K,
        kaw,
        s.c_max(),
        base_seed,
        runs,
        codes,
    )
    hist = np.bincount(codes, minlength=2**lat.site_count).astype(np.float64)
    return hist / runs
