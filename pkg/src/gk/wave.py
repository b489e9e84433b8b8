"""Monotone traveling waves of the bistable reaction term.

Solves U'' + c U' + f(U) + delta = 0 on the line with U increasing from
the lower stable root of f + delta to the upper one.  The speed c is found
by shooting: the left half leaves the lower saddle along its unstable
manifold, the right half is integrated backwards from the upper saddle,
and c is bisected until the two slopes agree where both halves cross the
midpoint value.  Each half is used only near its own saddle, so the
assembled profile keeps exponential tail accuracy.  The translate is
normalized by U(0) = (lower + upper) / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import BPoly

from .rates import RateSpec, validate


class WaveError(RuntimeError):
    """Root-structure loss or shooting non-convergence."""


@dataclass
class WaveSolution:
    z: np.ndarray
    U: np.ndarray
    Uprime: np.ndarray
    speed: float
    delta: float
    lower: float  # U(-inf)
    upper: float  # U(+inf)
    poly: np.ndarray  # coefficients of f + delta, highest first
    _interp: BPoly = field(repr=False, default=None)

    def __post_init__(self):
        if self._interp is None:
            # quintic Hermite: values plus first and second derivatives,
            # the latter taken from the ODE itself
            upp = -self.speed * self.Uprime - np.polyval(self.poly, self.U)
            data = np.stack([self.U, self.Uprime, upp], axis=1)
            self._interp = BPoly.from_derivatives(self.z, data)

    def __call__(self, z):
        """Profile value; clamped to the asymptotes outside the window."""
        z = np.asarray(z, dtype=np.float64)
        out = self._interp(np.clip(z, self.z[0], self.z[-1]))
        return np.where(
            z < self.z[0], self.lower, np.where(z > self.z[-1], self.upper, out)
        )

    def residual(self) -> float:
        """Sup of |U'' + c U' + f(U) + delta| at cell midpoints."""
        zm = 0.5 * (self.z[:-1] + self.z[1:])
        u = self._interp(zm)
        d1 = self._interp.derivative(1)(zm)
        d2 = self._interp.derivative(2)(zm)
        return float(np.abs(d2 + self.speed * d1 + np.polyval(self.poly, u)).max())


def shifted_roots(spec: RateSpec, delta: float) -> tuple[float, float, float]:
    """The three roots of f + delta, or raise if the structure is lost."""
    coeffs = spec.poly_coeffs().copy()
    coeffs[-1] += delta
    roots = np.roots(coeffs)
    real = np.sort(roots[np.abs(roots.imag) < 1e-9].real)
    if real.size != 3 or real[1] - real[0] < 1e-6 or real[2] - real[1] < 1e-6:
        raise WaveError(f"f + {delta:g} does not have three distinct real roots")
    return float(real[0]), float(real[1]), float(real[2])


def _half_shot(coeffs, c, start, rate, mid, forward: bool, rtol=1e-12):
    """Integrate one half trajectory until it crosses the midpoint value.

    Returns (sol, t_mid, slope_at_mid) or None when the crossing is missed.
    """

    def rhs(_z, y):
        return [y[1], -c * y[1] - np.polyval(coeffs, y[0])]

    def crossing(_z, y):
        return y[0] - mid

    crossing.terminal = True
    span = (0.0, 60.0) if forward else (0.0, -60.0)
    sol = solve_ivp(
        rhs,
        span,
        start,
        rtol=rtol,
        atol=rtol * 0.01,
        dense_output=True,
        events=(crossing,),
        max_step=0.25,
    )
    if sol.t_events[0].size == 0:
        return None
    t_mid = float(sol.t_events[0][0])
    slope = float(sol.y_events[0][0][1])
    return sol, t_mid, slope


def solve_wave(
    spec: RateSpec,
    delta: float = 0.0,
    n_grid: int = 4096,
    max_bisections: int = 200,
) -> WaveSolution:
    """Shooting solution of the wave boundary value problem."""
    profile = validate(spec)
    lower, _, upper = shifted_roots(spec, delta)
    coeffs = spec.poly_coeffs().copy()
    coeffs[-1] += delta
    deriv = np.polyder(coeffs)
    fp_lower = float(np.polyval(deriv, lower))
    fp_upper = float(np.polyval(deriv, upper))
    if fp_lower >= 0.0 or fp_upper >= 0.0:
        raise WaveError("outer roots lost stability after the delta shift")
    mid = 0.5 * (lower + upper)
    eps = 1e-9 * (upper - lower)

    def slope_gap(c: float, rtol=1e-10):
        lam = 0.5 * (-c + math.sqrt(c * c - 4.0 * fp_lower))
        left = _half_shot(coeffs, c, [lower + eps, lam * eps], lam, mid, True, rtol)
        # backwards from the upper saddle: U ~ upper - C exp(-mu z), mu > 0
        mu = 0.5 * (c + math.sqrt(c * c - 4.0 * fp_upper))
        right = _half_shot(coeffs, c, [upper - eps, mu * eps], mu, mid, False, rtol)
        # a missed crossing signals an extreme speed: the forward half
        # undershoots for c too large, the backward one for c too small
        if left is None and right is None:
            return None, left, right
        if left is None:
            return -math.inf, left, right
        if right is None:
            return math.inf, left, right
        return left[2] - right[2], left, right

    c_lo, c_hi = -4.0, 4.0
    gap_lo, _, _ = slope_gap(c_lo)
    gap_hi, _, _ = slope_gap(c_hi)
    if gap_lo is None or gap_hi is None or gap_lo <= 0.0 or gap_hi >= 0.0:
        raise WaveError("speed bracket [-4, 4] does not straddle the matching speed")
    left = right = None
    for _ in range(max_bisections):
        c = 0.5 * (c_lo + c_hi)
        gap, left, right = slope_gap(c)
        if gap is None:
            raise WaveError(f"both half trajectories missed the midpoint at c={c:g}")
        if gap > 0.0:
            c_lo = c
        else:
            c_hi = c
        if c_hi - c_lo < 1e-13:
            break
    c = 0.5 * (c_lo + c_hi)
    gap, left, right = slope_gap(c, rtol=1e-13)
    if left is None or right is None:
        raise WaveError("shooting did not converge")
    sol_l, t_mid_l, _ = left
    sol_r, t_mid_r, _ = right

    # sampling window: ~18 tail decay lengths of the reference cubic scale,
    # so the clamped asymptotes carry error well below 1e-6
    width = profile.alpha2 - profile.alpha1
    L = 18.0 / (math.sqrt(profile.C_lead / 2.0) * width)
    z = np.linspace(-L, L, n_grid)
    U = np.empty(n_grid)
    Up = np.empty(n_grid)
    neg = z <= 0.0
    t_l = np.clip(z[neg] + t_mid_l, 0.0, t_mid_l)
    vals = sol_l.sol(t_l)
    U[neg], Up[neg] = vals[0], vals[1]
    clipped = z[neg] + t_mid_l < 0.0
    U[neg] = np.where(clipped, lower, U[neg])
    Up[neg] = np.where(clipped, 0.0, Up[neg])
    pos = ~neg
    t_r = np.clip(z[pos] + t_mid_r, t_mid_r, 0.0)
    vals = sol_r.sol(t_r)
    U[pos], Up[pos] = vals[0], vals[1]
    clipped = z[pos] + t_mid_r > 0.0
    U[pos] = np.where(clipped, upper, U[pos])
    Up[pos] = np.where(clipped, 0.0, Up[pos])

    return WaveSolution(z, U, Up, c, delta, lower, upper, coeffs)


class WaveTable:
    """Cache of wave solutions per distinct delta (rounded key)."""

    def __init__(self, spec: RateSpec, n_grid: int = 4096):
        self.spec = spec
        self.n_grid = n_grid
        self._cache: dict[float, WaveSolution] = {}

    def get(self, delta: float) -> WaveSolution:
        key = round(float(delta), 12)
        if key not in self._cache:
            self._cache[key] = solve_wave(self.spec, key, n_grid=self.n_grid)
        return self._cache[key]
