"""Time integration of the discretized reaction-diffusion system.

The site-coupled ODE system is

    du_x/dt = Delta^N u_x + K f^N(x, u),

integrated by explicit Euler or classical RK4 under the diffusive CFL
restriction dt <= 0.9 / (4 d N^2 + K L_f), with L_f a crude Lipschitz
bound for the coupled reaction term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .lattice import ScalarField, TorusLattice, laplacian_grid, sup_gradient_norm
from .rates import RateSpec, reaction_lipschitz


class BlowUpError(RuntimeError):
    """The integration left the physically meaningful range."""


@dataclass
class HydroRun:
    lattice: TorusLattice
    spec: RateSpec
    K: float
    dt: float
    scheme: str
    t_out: np.ndarray  # output times
    fields: np.ndarray  # (times, site_count)

    def field_at(self, i: int) -> ScalarField:
        return ScalarField(self.lattice, self.fields[i].copy())


def stable_dt(lattice: TorusLattice, spec: RateSpec, K: float) -> float:
    """Explicit-scheme step bound 0.9 / (4 d N^2 + K L_f)."""
    return 0.9 / (4.0 * lattice.d * lattice.N**2 + K * reaction_lipschitz(spec))


def _rhs_factory(lattice: TorusLattice, spec: RateSpec, K: float):
    n1 = lattice.shift_table(spec.n1).reshape(lattice.shape)
    n2 = lattice.shift_table(spec.n2).reshape(lattice.shape)
    N = lattice.N
    ap, bp, cp = spec.a_plus, spec.b_plus, spec.c_plus
    am, bm, cm = spec.a_minus, spec.b_minus, spec.c_minus

    def rhs(g):
        flat = g.ravel()
        u1 = flat[n1]
        u2 = flat[n2]
        cplus = ap * u1 * u2 + bp * u1 + cp
        cminus = am * u1 * u2 + bm * u1 + cm
        return laplacian_grid(g, N) + K * ((1.0 - g) * cplus - g * cminus)

    return rhs


def integrate(
    u0: ScalarField,
    spec: RateSpec,
    K: float,
    T: float,
    dt: float | None = None,
    scheme: str = "rk4",
    t_out=None,
) -> HydroRun:
    """March the coupled system to time T, storing the field at t_out.

    t_out defaults to {0, T}.  dt defaults to the stability bound; a larger
    dt is rejected.  Any |u| > 2 aborts with a blow-up diagnostic.
    """
    lat = u0.lattice
    if scheme not in ("rk4", "explicit-euler"):
        raise ValueError(f"unknown scheme {scheme!r}")
    bound = stable_dt(lat, spec, K)
    if dt is None:
        dt = bound
    elif dt > bound * (1 + 1e-12):
        raise ValueError(f"dt={dt:g} exceeds the stability bound {bound:g}")
    if t_out is None:
        t_out = [0.0, T]
    t_out = np.asarray(t_out, dtype=np.float64)
    if t_out.size == 0 or np.any(np.diff(t_out) <= 0) or t_out[-1] > T + 1e-12:
        raise ValueError("t_out must be strictly increasing and end at <= T")

    rhs = _rhs_factory(lat, spec, K)
    g = u0.grid().copy()
    out = np.empty((t_out.size, lat.site_count))
    it = 0
    t = 0.0
    if t_out[0] <= 0.0:
        out[0] = g.ravel()
        it = 1
    # land exactly on each output time by clipping the last step before it
    while it < t_out.size:
        target = t_out[it]
        while t < target - 1e-15:
            h = min(dt, target - t)
            if scheme == "rk4":
                k1 = rhs(g)
                k2 = rhs(g + 0.5 * h * k1)
                k3 = rhs(g + 0.5 * h * k2)
                k4 = rhs(g + h * k3)
                g = g + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            else:
                g = g + h * rhs(g)
            t += h
            if np.abs(g).max() > 2.0:
                raise BlowUpError(
                    f"|u| exceeded 2 at t={t:g} (max {np.abs(g).max():g})"
                )
        out[it] = g.ravel()
        it += 1
    return HydroRun(lat, spec, K, dt, scheme, t_out, out)


def heat_kernel_solution(u0: ScalarField, t: float) -> np.ndarray:
    """Spectral solution of du/dt = Delta^N u (test oracle, d=1 only)."""
    lat = u0.lattice
    if lat.d != 1:
        raise ValueError("spectral oracle implemented for d=1")
    N = lat.N
    A = np.zeros((N, N))
    for x in range(N):
        A[x, (x + 1) % N] += N**2
        A[x, (x - 1) % N] += N**2
        A[x, x] -= 2 * N**2
    return scipy.linalg.expm(t * A) @ u0.values


def check_comparison(
    u_minus0: ScalarField,
    u_plus0: ScalarField,
    spec: RateSpec,
    K: float,
    T: float,
    dt: float | None = None,
    scheme: str = "explicit-euler",
    n_out: int = 8,
    tol: float = 1e-9,
) -> tuple[bool, float]:
    """Integrate an ordered pair and report the worst ordering violation."""
    if np.any(u_minus0.values > u_plus0.values):
        raise ValueError("initial data must satisfy u_minus0 <= u_plus0 sitewise")
    t_out = np.linspace(T / n_out, T, n_out)
    lo = integrate(u_minus0, spec, K, T, dt=dt, scheme=scheme, t_out=t_out)
    hi = integrate(u_plus0, spec, K, T, dt=dt, scheme=scheme, t_out=t_out)
    violation = float(np.maximum(lo.fields - hi.fields, 0.0).max())
    return violation <= tol, violation


@dataclass
class GradientReport:
    t_out: np.ndarray
    sup_gradient: np.ndarray
    C0: float
    fitted_C: float  # smallest C with sup-grad(t) <= K (C0 + C sqrt(t))


def gradient_report(run: HydroRun, C0: float, K: float) -> GradientReport:
    sup = np.array([sup_gradient_norm(run.field_at(i)) for i in range(run.t_out.size)])
    if sup[0] > C0 * K * (1 + 1e-9):
        raise ValueError(f"initial gradient {sup[0]:g} exceeds C0 K = {C0 * K:g}")
    mask = run.t_out > 0
    with np.errstate(divide="ignore"):
        cs = (sup[mask] / K - C0) / np.sqrt(run.t_out[mask])
    fitted = float(max(0.0, cs.max())) if mask.any() else 0.0
    return GradientReport(run.t_out, sup, C0, fitted)


def _dirichlet_sum(fields: np.ndarray, lattice: TorusLattice) -> np.ndarray:
    """N^2 sum over ordered neighbor pairs of (u_x - u_y)^2, per stored time."""
    out = np.zeros(fields.shape[0])
    for i in range(fields.shape[0]):
        g = fields[i].reshape(lattice.shape)
        s = 0.0
        for axis in range(lattice.d):
            diff = np.roll(g, -1, axis=axis) - g
            s += 2.0 * float((diff * diff).sum())  # both orientations
        out[i] = lattice.N**2 * s
    return out


@dataclass
class EnergyReport:
    lhs: float  # 0.5 sum u(T)^2 + time-integrated Dirichlet sum
    rhs: float  # C K N^d T + 0.5 N^d
    C: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


def energy_bound_constant(spec: RateSpec) -> float:
    """max over [0,1]^3 of |u_x f^N|; exact (quadratic in u_x per corner)."""
    best = 0.0
    for u1 in (0.0, 1.0):
        for u2 in (0.0, 1.0):
            cp = spec.c_plus_local(u1, u2)
            cm = spec.c_minus_local(u1, u2)
            # g(s) = s ((1-s) cp - s cm) = cp s - (cp + cm) s^2
            cands = [0.0, 1.0]
            if cp + cm != 0.0:
                s_star = cp / (2.0 * (cp + cm))
                if 0.0 < s_star < 1.0:
                    cands.append(s_star)
            for s in cands:
                best = max(best, abs(cp * s - (cp + cm) * s * s))
    return best


def energy_report(run: HydroRun) -> EnergyReport:
    """Both sides of the a-priori energy inequality over the stored grid."""
    lat = run.lattice
    dirichlet = _dirichlet_sum(run.fields, lat)
    integral = float(np.trapezoid(dirichlet, run.t_out))
    lhs = 0.5 * float((run.fields[-1] ** 2).sum()) + integral
    C = energy_bound_constant(run.spec)
    T = float(run.t_out[-1])
    rhs = C * run.K * lat.site_count * T + 0.5 * lat.site_count
    return EnergyReport(lhs, rhs, C)
