"""Flip rates of the three-coefficient form and the induced reaction term.

The creation/annihilation rates at a site read occupancies at two offsets
n1, n2:

    c_plus(eta)  = a_plus  eta_{n1} eta_{n2} + b_plus  eta_{n1} + c_plus
    c_minus(eta) = a_minus eta_{n1} eta_{n2} + b_minus eta_{n1} + c_minus

Averaging (1 - 2 eta_0) c(eta) over a Bernoulli(rho) product measure gives
the cubic reaction polynomial f(rho); with the reference coefficients
(32, 0, 3, 0, -16, 19) it factors as -32 (rho - 1/4)(rho - 1/2)(rho - 3/4),
which is bistable and balanced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import Configuration, ScalarField


@dataclass(frozen=True)
class RateSpec:
    a_plus: float
    b_plus: float
    c_plus: float
    a_minus: float
    b_minus: float
    c_minus: float
    n1: tuple[int, ...]
    n2: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "n1", tuple(int(k) for k in self.n1))
        object.__setattr__(self, "n2", tuple(int(k) for k in self.n2))
        if len(self.n1) != len(self.n2):
            raise ValueError("n1 and n2 must have the same dimension")

    @property
    def d(self) -> int:
        return len(self.n1)

    def c_plus_local(self, e1: float, e2: float) -> float:
        """Creation rate as a function of the two read occupancies."""
        return self.a_plus * e1 * e2 + self.b_plus * e1 + self.c_plus

    def c_minus_local(self, e1: float, e2: float) -> float:
        return self.a_minus * e1 * e2 + self.b_minus * e1 + self.c_minus

    def rate_local(self, e0: float, e1: float, e2: float) -> float:
        """Flip rate given (eta_x, eta_{x+n1}, eta_{x+n2})."""
        return self.c_plus_local(e1, e2) * (1.0 - e0) + self.c_minus_local(e1, e2) * e0

    def c_max(self) -> float:
        """Max flip rate over the 8 local occupancy patterns."""
        return max(
            self.rate_local(e0, e1, e2)
            for e0 in (0, 1)
            for e1 in (0, 1)
            for e2 in (0, 1)
        )

    def poly_coeffs(self) -> np.ndarray:
        """Coefficients of f(rho), highest degree first."""
        return np.array(
            [
                -(self.a_plus + self.a_minus),
                self.a_plus - self.b_plus - self.b_minus,
                self.b_plus - self.c_plus - self.c_minus,
                self.c_plus,
            ]
        )


REFERENCE_SPEC_1D = RateSpec(32.0, 0.0, 3.0, 0.0, -16.0, 19.0, (1,), (2,))
REFERENCE_SPEC_2D = RateSpec(32.0, 0.0, 3.0, 0.0, -16.0, 19.0, (1, 0), (0, 1))


@dataclass(frozen=True)
class BistableProfile:
    """The three roots of the cubic reaction term and its leading scale."""

    alpha1: float
    alpha_star: float
    alpha2: float
    C_lead: float


class RateValidationError(ValueError):
    """A rate spec violated one of the structural conditions."""

    def __init__(self, condition: str, message: str):
        super().__init__(f"{condition}: {message}")
        self.condition = condition


def glauber_rate(spec: RateSpec, cfg: Configuration, x: int) -> float:
    """Flip rate c_x(eta), reading eta at x, x+n1 and x+n2 (torus-wrapped)."""
    lat = cfg.lattice
    cx = np.asarray(lat.coords(x))
    e0 = float(cfg.occupancy[x])
    e1 = float(cfg.occupancy[lat.index(cx + np.asarray(spec.n1))])
    e2 = float(cfg.occupancy[lat.index(cx + np.asarray(spec.n2))])
    return spec.rate_local(e0, e1, e2)


def reaction_poly(spec: RateSpec, rho):
    """The cubic f(rho); equals E[(1 - 2 eta_0) c(eta)] under Bernoulli(rho)."""
    return np.polyval(spec.poly_coeffs(), rho)


def reaction_field(spec: RateSpec, u: ScalarField) -> np.ndarray:
    """f^N(x, u) = (1 - u_x) c_x^+(u) - u_x c_x^-(u) at every site."""
    lat = u.lattice
    v = u.values
    u1 = v[lat.shift_table(spec.n1)]
    u2 = v[lat.shift_table(spec.n2)]
    cp = spec.a_plus * u1 * u2 + spec.b_plus * u1 + spec.c_plus
    cm = spec.a_minus * u1 * u2 + spec.b_minus * u1 + spec.c_minus
    return (1.0 - v) * cp - v * cm


def reaction_discrete(spec: RateSpec, u: ScalarField, x: int) -> float:
    """f^N(x, u) at a single site."""
    lat = u.lattice
    cx = np.asarray(lat.coords(x))
    ux = u.values[x]
    u1 = u.values[lat.index(cx + np.asarray(spec.n1))]
    u2 = u.values[lat.index(cx + np.asarray(spec.n2))]
    cp = spec.a_plus * u1 * u2 + spec.b_plus * u1 + spec.c_plus
    cm = spec.a_minus * u1 * u2 + spec.b_minus * u1 + spec.c_minus
    return (1.0 - ux) * cp - ux * cm


def reaction_lipschitz(spec: RateSpec) -> float:
    """Crude Lipschitz bound for the coupled reaction term on [0,1]^sites."""
    coeffs = spec.poly_coeffs()
    deriv = np.polyder(coeffs)
    grid = np.linspace(0.0, 1.0, 201)
    sup_fprime = float(np.abs(np.polyval(deriv, grid)).max())
    return sup_fprime + 2.0 * (
        abs(spec.a_plus) + abs(spec.a_minus) + abs(spec.b_plus) + abs(spec.b_minus)
    )


def _cubic_roots_in_unit_interval(coeffs: np.ndarray) -> np.ndarray:
    """Three real roots of a cubic via the trigonometric method + Newton polish.

    Raises RateValidationError('A2', ...) unless there are exactly three
    distinct real roots, all inside (0, 1).
    """
    a, b, c, d = coeffs
    if a == 0.0:
        raise RateValidationError("A2", "reaction term is not a cubic")
    # depressed cubic t^3 + p t + q, rho = t - b/(3a)
    p = (3 * a * c - b * b) / (3 * a * a)
    q = (2 * b**3 - 9 * a * b * c + 27 * a * a * d) / (27 * a**3)
    disc = -(4 * p**3 + 27 * q * q)
    if disc <= 0.0:
        raise RateValidationError("A2", "cubic does not have three distinct real roots")
    m = 2.0 * math.sqrt(-p / 3.0)
    theta = math.acos(max(-1.0, min(1.0, 3.0 * q / (p * m)))) / 3.0
    ts = [m * math.cos(theta - 2.0 * math.pi * k / 3.0) for k in range(3)]
    roots = np.sort(np.array(ts) - b / (3 * a))
    # one Newton step per root
    deriv = np.polyder(coeffs)
    fp = np.polyval(deriv, roots)
    roots = roots - np.polyval(coeffs, roots) / fp
    if not np.all((roots > 0.0) & (roots < 1.0)):
        raise RateValidationError("A2", f"roots {roots} not all inside (0, 1)")
    return roots


def validate(spec: RateSpec) -> BistableProfile:
    """Check the structural conditions on a rate spec.

    Verifies: the offset condition on {n1, n2, 0}; positivity of both
    rate functions on [0,1]^2 (corner points suffice by multilinearity);
    bistability of the cubic with the balance integral vanishing (exact
    antiderivative); monotonicity of the creation/annihilation rates.
    Raises RateValidationError naming the first violated condition.
    """
    zero = (0,) * spec.d
    if len({spec.n1, spec.n2, zero}) != 3:
        raise RateValidationError("A1", "offsets {n1, n2, 0} must be pairwise distinct")
    for n in (spec.n1, spec.n2):
        if not any(k > 0 for k in n):
            raise RateValidationError(
                "A1", f"offset {n} has no strictly positive component"
            )
    for e1 in (0.0, 1.0):
        for e2 in (0.0, 1.0):
            if spec.c_plus_local(e1, e2) <= 0.0:
                raise RateValidationError(
                    "positivity", f"c^+ nonpositive at corner ({e1}, {e2})"
                )
            if spec.c_minus_local(e1, e2) <= 0.0:
                raise RateValidationError(
                    "positivity", f"c^- nonpositive at corner ({e1}, {e2})"
                )

    coeffs = spec.poly_coeffs()
    roots = _cubic_roots_in_unit_interval(coeffs)
    deriv = np.polyder(coeffs)
    if np.polyval(deriv, roots[0]) >= 0.0 or np.polyval(deriv, roots[2]) >= 0.0:
        raise RateValidationError("A2", "outer roots are not stable (f' >= 0)")

    anti = np.polyint(coeffs)
    balance = np.polyval(anti, roots[2]) - np.polyval(anti, roots[0])
    if abs(balance) > 1e-10:
        raise RateValidationError(
            "balance", f"integral of f between outer roots is {balance:.3e}"
        )

    # (A3): c^+(u) nondecreasing, c^-(u) nonincreasing on [0,1]^2, checked
    # via the sign of the partial derivatives at the corner points
    # (the partials are affine in the other variable).
    for u_other in (0.0, 1.0):
        if spec.a_plus * u_other + spec.b_plus < 0.0:
            raise RateValidationError("A3", "c^+ not increasing in u_{n1}")
        if spec.a_plus * u_other < 0.0:
            raise RateValidationError("A3", "c^+ not increasing in u_{n2}")
        if spec.a_minus * u_other + spec.b_minus > 0.0:
            raise RateValidationError("A3", "c^- not decreasing in u_{n1}")
        if spec.a_minus * u_other > 0.0:
            raise RateValidationError("A3", "c^- not decreasing in u_{n2}")

    c_lead = float(-coeffs[0])
    return BistableProfile(float(roots[0]), float(roots[1]), float(roots[2]), c_lead)
