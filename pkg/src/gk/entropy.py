"""Executable entropy-method objects, verified against brute force.

Everything here revolves around a Bernoulli product measure with
site-dependent mean u and the centered variables

    etabar_x = eta_x - u_x,      omega_x = etabar_x / chi(u_x),

chi(rho) = rho (1 - rho).  The closed-form adjoint actions of the exchange
and flip generators on the constant function are evaluated directly and
cross-checked by full enumeration of the 2^{N^d} generator matrix on small
lattices.  The module also carries the constructive flow decomposition on
boxes, the window-averaged summation-by-parts field h and its identity,
product-measure relative entropy and the sub-Gaussian concentration bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import gammaln

from .lattice import Configuration, ScalarField, TorusLattice
from .rates import RateSpec


def chi(rho):
    return rho * (1.0 - rho)


@dataclass(frozen=True)
class ProductMeasure:
    """Bernoulli product measure with site-dependent mean in (0, 1)."""

    mean: ScalarField

    def __post_init__(self):
        v = self.mean.values
        if np.any(v <= 1e-12) or np.any(v >= 1.0 - 1e-12):
            raise ValueError("product-measure means must lie strictly inside (0, 1)")

    def state_probabilities(self) -> np.ndarray:
        """Probabilities of all 2^{N^d} states (small lattices only)."""
        n = self.mean.lattice.site_count
        if n > 20:
            raise ValueError("state space too large to enumerate")
        states = all_states(n)
        u = self.mean.values
        return np.exp(
            states @ np.log(u) + (1 - states) @ np.log(1.0 - u)
        )


def all_states(nsites: int) -> np.ndarray:
    """(2^n, n) array of occupancy patterns; row index is the state code."""
    codes = np.arange(2**nsites, dtype=np.int64)
    return (codes[:, None] >> np.arange(nsites - 1, -1, -1)) & 1


def state_code(occ: np.ndarray) -> int:
    code = 0
    for b in occ:
        code = 2 * code + int(b)
    return code


def centered(u: ScalarField, cfg: Configuration) -> tuple[np.ndarray, np.ndarray]:
    """(etabar, omega) for one configuration."""
    eta = cfg.occupancy.astype(np.float64)
    etabar = eta - u.values
    return etabar, etabar / chi(u.values)


# --- closed-form adjoint actions --------------------------------------------


def adjoint_kawasaki_one(u: ScalarField, cfg: Configuration) -> float:
    """Exchange-part adjoint acting on 1, evaluated at one configuration.

    -1/2 sum over ordered neighbor pairs of (u_y - u_x)^2 omega_x omega_y
    plus sum_x (Delta u)_x omega_x, with the unscaled neighbor-sum
    Laplacian.
    """
    lat = u.lattice
    _, om = centered(u, cfg)
    ug = u.grid()
    omg = om.reshape(lat.shape)
    quad = 0.0
    lap = np.zeros_like(ug)
    for axis in range(lat.d):
        for shift in (-1, 1):
            uy = np.roll(ug, shift, axis=axis)
            omy = np.roll(omg, shift, axis=axis)
            quad += float((((uy - ug) ** 2) * omg * omy).sum())
            lap += uy - ug
    return -0.5 * quad + float((lap * omg).sum())


def adjoint_glauber_one(
    spec: RateSpec, u: ScalarField, cfg: Configuration
) -> dict[str, float]:
    """Flip-part adjoint acting on 1: direct form and its (F, linear) split.

    Returns {'direct', 'F', 'linear', 'F_terms': (a, b, c parts)}; the
    identity direct == F + linear holds for rates of the three-coefficient
    form.
    """
    lat = u.lattice
    etabar, om = centered(u, cfg)
    s1 = lat.shift_table(spec.n1)
    s2 = lat.shift_table(spec.n2)
    eta = cfg.occupancy.astype(np.float64)
    e1, e2 = eta[s1], eta[s2]
    uv = u.values
    cplus = spec.a_plus * e1 * e2 + spec.b_plus * e1 + spec.c_plus
    cminus = spec.a_minus * e1 * e2 + spec.b_minus * e1 + spec.c_minus
    direct = float(((cplus / uv - cminus / (1.0 - uv)) * etabar).sum())

    u1, u2 = uv[s1], uv[s2]
    gp = spec.a_plus * (1.0 - uv) - spec.a_minus * uv
    a_coef = chi(u1) * (gp * u2 + spec.b_plus * (1.0 - uv) - spec.b_minus * uv)
    b_coef = chi(u2) * gp * u1
    c_coef = chi(u1) * chi(u2) * gp
    om1, om2 = om[s1], om[s2]
    Fa = float((a_coef * om * om1).sum())
    Fb = float((b_coef * om * om2).sum())
    Fc = float((c_coef * om * om1 * om2).sum())

    cplus_u = spec.a_plus * u1 * u2 + spec.b_plus * u1 + spec.c_plus
    cminus_u = spec.a_minus * u1 * u2 + spec.b_minus * u1 + spec.c_minus
    fN = (1.0 - uv) * cplus_u - uv * cminus_u
    linear = float((fN * om).sum())
    return {
        "direct": direct,
        "F": Fa + Fb + Fc,
        "linear": linear,
        "F_terms": (Fa, Fb, Fc),
    }


def quadratic_terms_tilde(
    spec: RateSpec, u: ScalarField, cfg: Configuration
) -> dict[str, np.ndarray]:
    """The weighted fields paired in the quadratic adjoint remainder.

    'a': (coefficient * omega)_x to be paired with omega_{x+n1}, similarly
    'b' (offset n2) and 'c' (both offsets).
    """
    lat = u.lattice
    _, om = centered(u, cfg)
    s1 = lat.shift_table(spec.n1)
    s2 = lat.shift_table(spec.n2)
    uv = u.values
    u1, u2 = uv[s1], uv[s2]
    gp = spec.a_plus * (1.0 - uv) - spec.a_minus * uv
    a_coef = chi(u1) * (gp * u2 + spec.b_plus * (1.0 - uv) - spec.b_minus * uv)
    b_coef = chi(u2) * gp * u1
    c_coef = chi(u1) * chi(u2) * gp
    return {"a": a_coef * om, "b": b_coef * om, "c": c_coef * om}


def cor26_residual(
    spec: RateSpec,
    u: ScalarField,
    dudt: np.ndarray,
    cfg: Configuration,
    kawasaki_factor: float,
    K: float,
) -> float:
    """Residual of the quadratic-remainder assembly.

    Checks that (kaw L_K + K L_G)^{*,nu} 1 - sum_x du_x/dt omega_x equals
    the purely quadratic expression (exchange quadratic term + K F) when
    du/dt solves the discretized reaction-diffusion system with the same
    kaw factor standing in for N^2.
    """
    lat = u.lattice
    _, om = centered(u, cfg)
    lhs = (
        kawasaki_factor * adjoint_kawasaki_one(u, cfg)
        + K * adjoint_glauber_one(spec, u, cfg)["direct"]
        - float((dudt * om).sum())
    )
    ug = u.grid()
    omg = om.reshape(lat.shape)
    quad = 0.0
    for axis in range(lat.d):
        for shift in (-1, 1):
            uy = np.roll(ug, shift, axis=axis)
            omy = np.roll(omg, shift, axis=axis)
            quad += float((((uy - ug) ** 2) * omg * omy).sum())
    V1 = -0.5 * kawasaki_factor * quad
    g = adjoint_glauber_one(spec, u, cfg)
    rhs = V1 + K * g["F"]
    return abs(lhs - rhs)


# --- brute-force enumeration oracles ----------------------------------------


def kawasaki_generator(lattice: TorusLattice, factor: float = 1.0) -> np.ndarray:
    """Full 2^{N^d} generator of the exchange dynamics (rate factor/2 per
    ordered neighbor pair)."""
    n = lattice.site_count
    if n > 20:
        raise ValueError("state space too large to enumerate")
    states = all_states(n)
    nbr = lattice.neighbor_table()
    Q = np.zeros((2**n, 2**n))
    for s in range(2**n):
        occ = states[s]
        for x in range(n):
            for k in range(nbr.shape[0]):
                y = nbr[k, x]
                if occ[x] == occ[y]:
                    continue
                occ2 = occ.copy()
                occ2[x], occ2[y] = occ2[y], occ2[x]
                Q[s, state_code(occ2)] += 0.5 * factor
        Q[s, s] -= Q[s].sum()
    return Q


def glauber_generator(
    lattice: TorusLattice, spec: RateSpec, K: float = 1.0
) -> np.ndarray:
    """Full generator of the flip dynamics with rates K c_x(eta)."""
    n = lattice.site_count
    if n > 20:
        raise ValueError("state space too large to enumerate")
    states = all_states(n)
    s1 = lattice.shift_table(spec.n1)
    s2 = lattice.shift_table(spec.n2)
    Q = np.zeros((2**n, 2**n))
    for s in range(2**n):
        occ = states[s]
        for x in range(n):
            c = spec.rate_local(occ[x], occ[s1[x]], occ[s2[x]])
            occ2 = occ.copy()
            occ2[x] = 1 - occ2[x]
            Q[s, state_code(occ2)] += K * c
        Q[s, s] -= Q[s].sum()
    return Q


def brute_force_adjoint(
    Q: np.ndarray, measure: ProductMeasure, cfg: Configuration
) -> float:
    """L^{*,nu} 1 at a configuration, from the full generator matrix.

    Uses the duality sum_eta Q(eta, eta') nu(eta) = nu(eta') L^{*,nu}1(eta').
    """
    probs = measure.state_probabilities()
    code = state_code(cfg.occupancy)
    return float((Q[:, code] @ probs) / probs[code])


# --- relative entropy --------------------------------------------------------


def relative_entropy_product(mu_mean: ScalarField, nu_mean: ScalarField) -> float:
    """KL divergence between Bernoulli product measures, summed over sites.

    Returns +inf when a deterministic reference site disagrees with the
    corresponding mu marginal.
    """
    m = mu_mean.values
    v = nu_mean.values
    if np.any(m < 0.0) or np.any(m > 1.0):
        raise ValueError("mu means must lie in [0, 1]")
    if np.any((v <= 0.0) & (m > 0.0)) or np.any((v >= 1.0) & (m < 1.0)):
        return math.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(m > 0.0, m * np.log(m / v), 0.0)
        t2 = np.where(m < 1.0, (1.0 - m) * np.log((1.0 - m) / (1.0 - v)), 0.0)
    return float((t1 + t2).sum())


def entropy_proxy(
    site_means: np.ndarray, hydro_fields: np.ndarray, lattice: TorusLattice
) -> np.ndarray:
    """Per-time product-marginal KL between ensemble means and the
    deterministic solution, normalized by N^d.

    This is a lower-bound proxy for the full relative entropy (projecting
    to product marginals only decreases it); it is reported as a proxy,
    never as the entropy itself.
    """
    if site_means.shape != hydro_fields.shape:
        raise ValueError("time grids / lattices mismatch")
    out = np.empty(site_means.shape[0])
    for i in range(site_means.shape[0]):
        mu = ScalarField(lattice, np.clip(site_means[i], 0.0, 1.0))
        nu = ScalarField(lattice, np.clip(hydro_fields[i], 1e-12, 1.0 - 1e-12))
        out[i] = relative_entropy_product(mu, nu) / lattice.site_count
    return out


# --- flow construction -------------------------------------------------------


@dataclass
class Flow:
    """Antisymmetric bond flow on the box [0, 2 ell - 1)^d.

    flows[j, x] is the flow across the bond (x, x + e_j); bonds leaving the
    box carry zero flow.  Connects the Dirac mass at the origin with the
    double window average q_ell (uniform-window convolution square).
    """

    ell: int
    d: int
    flows: np.ndarray  # (d,) + (2 ell - 1,) * d

    @property
    def side(self) -> int:
        return 2 * self.ell - 1

    def divergence(self) -> np.ndarray:
        div = np.zeros(self.flows.shape[1:])
        for j in range(self.d):
            f = self.flows[j]
            div += f
            shifted = np.zeros_like(f)
            idx = [slice(None)] * self.d
            idx_src = [slice(None)] * self.d
            idx[j] = slice(1, None)
            idx_src[j] = slice(0, -1)
            shifted[tuple(idx)] = f[tuple(idx_src)]
            div -= shifted
        return div

    def target_discrepancy(self) -> np.ndarray:
        """divergence minus (delta_0 - q_ell); zero for an exact flow."""
        q = window_square(self.ell, self.d)
        expected = -q
        expected[(0,) * self.d] += 1.0
        return self.divergence() - expected


def window_square(ell: int, d: int) -> np.ndarray:
    """q_ell = p_ell * p_ell on the box of side 2 ell - 1."""
    p = np.full((ell,) * d, 1.0 / ell**d)
    if ell == 1:
        return p.copy()
    return fftconvolve(p, p).clip(min=0.0) if False else _exact_conv(p, p)


def _exact_conv(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full convolution; direct for small sizes, FFT beyond."""
    if a.size * b.size <= 2**24:
        from scipy.signal import convolve

        return convolve(a, b, method="direct")
    return fftconvolve(a, b)


def flow_construct(ell: int, d: int) -> Flow:
    """Stepwise window-growing flow, then convolution with the window.

    Step k moves the uniform mass on the side-k box to the side-(k+1) box,
    one coordinate at a time: each axis extension is a within-line prefix
    transport, so the per-bond magnitude is O(k^-d).  Summing the steps
    links the origin mass to the single window average; adding its
    window-convolution links it to the double average.
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    side = 2 * ell - 1
    flows = np.zeros((d,) + (side,) * d)
    if ell == 1:
        return Flow(ell, d, flows)

    psi = np.zeros((d,) + (ell,) * d)  # flow from delta_0 to p_ell
    for k in range(1, ell):
        for j in range(d):
            # axes < j already extended to k+1, axes >= j still k
            sizes = [k + 1 if i < j else k for i in range(d)]
            P = 1.0 / math.prod(sizes)
            line = (np.arange(k) + 1.0) * P / (k + 1.0)  # prefix flow values
            shape = [k + 1 if i < j else k for i in range(d)]
            shape[j] = k
            block = np.ones(shape)
            expand = line.reshape([k if i == j else 1 for i in range(d)])
            region = tuple(slice(0, s) for s in shape)
            psi[(j,) + region] += block * expand

    p = np.full((ell,) * d, 1.0 / ell**d)
    for j in range(d):
        conv = _exact_conv(psi[j], p)
        flows[j][tuple(slice(0, s) for s in conv.shape)] = conv
        flows[j][tuple(slice(0, ell) for _ in range(d))] += psi[j]
    return Flow(ell, d, flows)


def flow_cost(flow: Flow) -> float:
    """1/2 sum over ordered bond pairs of Phi^2 (= plain sum over bonds)."""
    return float((flow.flows**2).sum())


# --- window averages and the h-field identity --------------------------------


def window_offsets(ell: int, d: int) -> np.ndarray:
    """All offsets in the box [0, ell)^d, shape (ell^d, d)."""
    grids = np.meshgrid(*[np.arange(ell)] * d, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def left_average(g: np.ndarray, lattice: TorusLattice, ell: int) -> np.ndarray:
    """(1/ell^d) sum over window offsets y of g_{x-y}."""
    out = np.zeros_like(g)
    for off in window_offsets(ell, lattice.d):
        out += g[lattice.shift_table(-off)]
    return out / ell**lattice.d


def right_average(g: np.ndarray, lattice: TorusLattice, ell: int) -> np.ndarray:
    """(1/ell^d) sum over window offsets y of g_{x+y}."""
    out = np.zeros_like(g)
    for off in window_offsets(ell, lattice.d):
        out += g[lattice.shift_table(off)]
    return out / ell**lattice.d


def h_field(
    tilde: np.ndarray,
    flow: Flow,
    lattice: TorusLattice,
    n_offset,
) -> np.ndarray:
    """h_x^{ell,j} = sum_y tilde_{x-y-n} Phi(y, y+e_j); shape (d, sites)."""
    n_offset = np.asarray(n_offset, dtype=np.int64)
    out = np.zeros((lattice.d, lattice.site_count))
    side = flow.side
    for y in window_offsets(side, lattice.d):
        for j in range(lattice.d):
            phi = flow.flows[(j,) + tuple(y)]
            if phi == 0.0:
                continue
            out[j] += tilde[lattice.shift_table(-(y + n_offset))] * phi
    return out


@dataclass
class HFieldCheck:
    residual: float
    exchange_invariance_error: float
    V: float
    V_avg: float


def h_field_identity(
    spec: RateSpec,
    u: ScalarField,
    cfg: Configuration,
    ell: int,
    term: str = "a",
    n_invariance_samples: int = 5,
    rng: np.random.Generator | None = None,
) -> HFieldCheck:
    """Check the summation-by-parts identity for one quadratic term.

    V - V^ell must equal sum_j sum_x h_x^{ell,j} (omega_x - omega_{x+e_j})
    (at unit front factor), and h_x^{ell,j} must be invariant under the
    exchange across its own bond.
    """
    lat = u.lattice
    n_off = np.asarray(spec.n1 if term in ("a", "c") else spec.n2)
    if term == "b":
        n_off = np.asarray(spec.n2)
    if lat.N <= 4 * ell + int(np.abs(n_off).max()):
        raise ValueError("lattice too small for the averaging windows")
    _, om = centered(u, cfg)
    tilde = quadratic_terms_tilde(spec, u, cfg)[term]
    paired = om[lat.shift_table(n_off)]
    V = float((tilde * paired).sum())
    V_avg = float(
        (
            left_average(tilde, lat, ell) * right_average(paired, lat, ell)
        ).sum()
    )
    flow = flow_construct(ell, lat.d)
    h = h_field(tilde, flow, lat, n_off)
    rhs = 0.0
    for j in range(lat.d):
        e = np.zeros(lat.d, dtype=np.int64)
        e[j] = 1
        rhs += float((h[j] * (om - om[lat.shift_table(e)])).sum())
    residual = abs(V - V_avg - rhs)

    # exchange invariance h_x^{ell,j}(eta^{x, x+e_j}) = h_x^{ell,j}(eta)
    if rng is None:
        rng = np.random.default_rng(0)
    inv_err = 0.0
    for _ in range(n_invariance_samples):
        x = int(rng.integers(lat.site_count))
        j = int(rng.integers(lat.d))
        e = np.zeros(lat.d, dtype=np.int64)
        e[j] = 1
        y = lat.shift_table(e)[x]
        occ2 = cfg.occupancy.copy()
        occ2[x], occ2[y] = occ2[y], occ2[x]
        cfg2 = Configuration(lat, occ2)
        tilde2 = quadratic_terms_tilde(spec, u, cfg2)[term]
        h2 = h_field(tilde2, flow, lat, n_off)
        inv_err = max(inv_err, abs(h2[j, x] - h[j, x]))
    return HFieldCheck(residual, inv_err, V, V_avg)


# --- concentration inequality -------------------------------------------------


def binomial_square_lmgf(n: int, gamma: float, p: float = 0.5) -> float:
    """log E exp(gamma (sum of n centered Bernoulli(p))^2), exact."""
    k = np.arange(n + 1)
    logw = (
        gammaln(n + 1)
        - gammaln(k + 1)
        - gammaln(n - k + 1)
        + k * math.log(p)
        + (n - k) * math.log(1.0 - p)
    )
    dev = k - n * p
    m = logw + gamma * dev * dev
    mmax = m.max()
    return float(mmax + math.log(np.exp(m - mmax).sum()))


@dataclass
class ConcentrationCheck:
    lhs: float
    lhs_band: float  # bootstrap half-width
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + self.lhs_band


def concentration_check(
    intervals,
    gamma: float,
    samples: int,
    rng: np.random.Generator | None = None,
    n_boot: int = 200,
) -> ConcentrationCheck:
    """Monte Carlo check of log E exp(gamma (sum of centered X_i)^2)
    against the bound 2 gamma sigma_bar^2, for independent X_i uniform on
    the given intervals."""
    intervals = np.asarray(intervals, dtype=np.float64)
    widths = intervals[:, 1] - intervals[:, 0]
    sigma2 = float((widths**2).sum())
    if gamma < 0.0 or gamma * sigma2 > 1.0 + 1e-12:
        raise ValueError("gamma must lie in [0, 1/sigma_bar^2]")
    if rng is None:
        rng = np.random.default_rng(0)
    x = intervals[:, 0] + widths * rng.random((samples, intervals.shape[0]))
    s = (x - x.mean(axis=0)).sum(axis=1)
    vals = np.exp(gamma * s * s)
    lhs = math.log(float(vals.mean()))
    boots = np.empty(n_boot)
    for b in range(n_boot):
        idx = rng.integers(samples, size=samples)
        boots[b] = math.log(float(vals[idx].mean()))
    band = 3.0 * float(boots.std())
    return ConcentrationCheck(lhs, band, 2.0 * gamma * sigma2)


# --- Dirichlet forms on enumerable lattices (exploration only) ---------------


def dirichlet_forms(
    f: np.ndarray,
    lattice: TorusLattice,
    spec: RateSpec,
    measure: ProductMeasure,
) -> tuple[float, float]:
    """(D_K, D_G) of a state-indexed function under the product measure."""
    n = lattice.site_count
    states = all_states(n)
    probs = measure.state_probabilities()
    nbr = lattice.neighbor_table()
    s1 = lattice.shift_table(spec.n1)
    s2 = lattice.shift_table(spec.n2)
    dk = 0.0
    dg = 0.0
    for s in range(2**n):
        occ = states[s]
        for x in range(n):
            for k in range(nbr.shape[0]):
                y = nbr[k, x]
                if occ[x] != occ[y]:
                    occ2 = occ.copy()
                    occ2[x], occ2[y] = occ2[y], occ2[x]
                    diff = f[state_code(occ2)] - f[s]
                    dk += 0.25 * diff * diff * probs[s]
            c = spec.rate_local(occ[x], occ[s1[x]], occ[s2[x]])
            occ2 = occ.copy()
            occ2[x] = 1 - occ2[x]
            diff = f[state_code(occ2)] - f[s]
            dg += c * diff * diff * probs[s]
    return dk, dg
