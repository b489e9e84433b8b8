"""Experiment configuration: key=value sections, validation, K(N) scaling.

Config files are UTF-8 INI-style text.  Recognized sections and keys:

    [lattice]   d, N
    [rates]     a_plus b_plus c_plus a_minus b_minus c_minus, n1, n2
                (offsets comma-separated; defaults to the reference spec)
    [dynamics]  K, scaling = fixed | sqrt-log, delta, K_max, C_growth
    [initial]   kind = circle | stripe | constant, center, R0, lo, hi,
                d0, value
    [time]      T, grid (comma-separated times) or n_out
    [ensemble]  runs, seed
    [envelope]  a, m2, m3, beta

Every numeric guard failure raises ConfigError; callers map that to exit
code 2.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

import numpy as np

from .rates import REFERENCE_SPEC_1D, REFERENCE_SPEC_2D, RateSpec, RateValidationError, validate


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    d: int
    N: int
    spec: RateSpec
    K: float
    scaling: str  # 'fixed' or 'sqrt-log'
    delta: float
    K_max: float
    C_growth: float  # constant of the K <= C N^(2/3) growth guard
    front_kind: str  # 'circle', 'stripe' or 'constant'
    center: tuple[float, ...]
    R0: float
    stripe_lo: float
    stripe_hi: float
    d0: float
    constant_value: float
    T: float
    t_grid: np.ndarray
    runs: int
    seed: int
    env_a: float
    env_m2: float
    env_m3: float
    env_beta: float
    raw: dict = field(default_factory=dict, repr=False)

    def require_sqrt_log_guard(self):
        """1 <= K <= delta sqrt(log N), asserted whenever the scaling
        selector is active."""
        bound = self.delta * math.sqrt(math.log(self.N))
        if not 1.0 <= self.K <= bound + 1e-12:
            raise ConfigError(
                f"K = {self.K:g} outside [1, delta sqrt(log N)] = [1, {bound:g}]"
            )

    def require_growth_guard(self):
        """K <= C N^(2/3), required for envelope (sandwich) experiments."""
        bound = self.C_growth * self.N ** (2.0 / 3.0)
        if self.K > bound + 1e-12:
            raise ConfigError(f"K = {self.K:g} exceeds C N^(2/3) = {bound:g}")


def _floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"bad numeric list {text!r}") from exc


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}") from exc


def load_config(path) -> ExperimentConfig:
    """Parse and validate a config file; rate conditions checked up front."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    read = cp.read(path, encoding="utf-8")
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    try:
        return _build(cp)
    except (configparser.Error, KeyError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def _build(cp: configparser.ConfigParser) -> ExperimentConfig:
    if "lattice" not in cp:
        raise ConfigError("missing [lattice] section")
    d = cp.getint("lattice", "d")
    N = cp.getint("lattice", "N")
    if d < 1 or N < 2:
        raise ConfigError(f"invalid lattice d={d}, N={N}")

    if "rates" in cp:
        r = cp["rates"]
        base = REFERENCE_SPEC_1D if d == 1 else REFERENCE_SPEC_2D
        default_n1 = ",".join(str(k) for k in (base.n1 if base.d == d else (1,) + (0,) * (d - 1)))
        default_n2 = ",".join(str(k) for k in (base.n2 if base.d == d else (2,) + (0,) * (d - 1)))
        spec = RateSpec(
            r.getfloat("a_plus", 32.0),
            r.getfloat("b_plus", 0.0),
            r.getfloat("c_plus", 3.0),
            r.getfloat("a_minus", 0.0),
            r.getfloat("b_minus", -16.0),
            r.getfloat("c_minus", 19.0),
            _ints(r.get("n1", default_n1)),
            _ints(r.get("n2", default_n2)),
        )
    elif d == 1:
        spec = REFERENCE_SPEC_1D
    elif d == 2:
        spec = REFERENCE_SPEC_2D
    else:
        spec = RateSpec(
            32.0, 0.0, 3.0, 0.0, -16.0, 19.0,
            (1,) + (0,) * (d - 1), (0, 1) + (0,) * (d - 2),
        )
    if spec.d != d:
        raise ConfigError(f"rate offsets have dimension {spec.d}, lattice has {d}")
    try:
        validate(spec)
    except RateValidationError as exc:
        raise ConfigError(f"rate spec rejected ({exc})") from exc

    dyn = cp["dynamics"] if "dynamics" in cp else {}
    scaling = dyn.get("scaling", "fixed") if dyn else "fixed"
    delta = float(dyn.get("delta", 1.0)) if dyn else 1.0
    K_max = float(dyn.get("k_max", 16.0)) if dyn else 16.0
    C_growth = float(dyn.get("c_growth", 1.0)) if dyn else 1.0
    if scaling == "sqrt-log":
        K = min(K_max, delta * math.sqrt(math.log(N)))
    elif scaling == "fixed":
        K = float(dyn.get("k", 1.0)) if dyn else 1.0
    else:
        raise ConfigError(f"unknown scaling selector {scaling!r}")
    if not math.isfinite(K) or K < 0.0:
        raise ConfigError(f"invalid K = {K!r}")

    ini = cp["initial"] if "initial" in cp else {}
    front_kind = ini.get("kind", "circle" if d >= 2 else "stripe") if ini else (
        "circle" if d >= 2 else "stripe"
    )
    center = tuple(_floats(ini.get("center", ",".join(["0.5"] * d)))) if ini else (0.5,) * d
    if len(center) != d:
        raise ConfigError(f"center must have {d} components")
    R0 = float(ini.get("r0", 0.3)) if ini else 0.3
    stripe_lo = float(ini.get("lo", 0.25)) if ini else 0.25
    stripe_hi = float(ini.get("hi", 0.75)) if ini else 0.75
    d0 = float(ini.get("d0", 0.1)) if ini else 0.1
    constant_value = float(ini.get("value", 0.5)) if ini else 0.5
    if front_kind not in ("circle", "stripe", "constant"):
        raise ConfigError(f"unknown initial kind {front_kind!r}")
    if front_kind == "circle" and d < 2:
        raise ConfigError("circle fronts need d >= 2")
    if front_kind == "stripe" and not 0.0 < stripe_lo < stripe_hi < 1.0:
        raise ConfigError("stripe bounds must satisfy 0 < lo < hi < 1")
    if d0 <= 0.0:
        raise ConfigError("d0 must be positive")

    tm = cp["time"] if "time" in cp else {}
    if tm and tm.get("grid"):
        t_grid = np.asarray(_floats(tm.get("grid")), dtype=np.float64)
        if t_grid.size == 0 or np.any(np.diff(t_grid) <= 0) or t_grid[0] < 0:
            raise ConfigError("time grid must be nonnegative and increasing")
        T = float(t_grid[-1])
    else:
        T = float(tm.get("t", 0.01)) if tm else 0.01
        n_out = int(tm.get("n_out", 5)) if tm else 5
        if T <= 0 or n_out < 1:
            raise ConfigError("need T > 0 and n_out >= 1")
        t_grid = np.linspace(T / n_out, T, n_out)

    ens = cp["ensemble"] if "ensemble" in cp else {}
    runs = int(ens.get("runs", 8)) if ens else 8
    seed = int(ens.get("seed", 0)) if ens else 0
    if runs < 1:
        raise ConfigError("runs must be >= 1")

    env = cp["envelope"] if "envelope" in cp else {}
    env_a = float(env.get("a", 0.75)) if env else 0.75
    env_m2 = float(env.get("m2", 1.0)) if env else 1.0
    env_m3 = float(env.get("m3", 0.25)) if env else 0.25
    env_beta = float(env.get("beta", 0.0)) if env else 0.0
    if env_a <= 0.5:
        raise ConfigError("envelope exponent a must exceed 1/2")

    raw = {s: dict(cp[s]) for s in cp.sections()}
    return ExperimentConfig(
        d, N, spec, K, scaling, delta, K_max, C_growth,
        front_kind, center, R0, stripe_lo, stripe_hi, d0, constant_value,
        T, t_grid, runs, seed, env_a, env_m2, env_m3, env_beta, raw,
    )
