"""Torus lattice geometry, occupancy configurations and scalar fields.

Sites of the d-dimensional discrete torus of side N are indexed row-major
over coordinates (x_1, ..., x_d), each coordinate in [0, N).  All shift
arithmetic wraps mod N.  For N = 2 the two axis neighbors of a site
coincide; the neighbor table keeps both entries (a double bond), so the
directed-edge sums used by the generators stay literal at every N.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TorusLattice:
    """Discrete torus (Z/NZ)^d with row-major site indexing."""

    d: int
    N: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.N < 2:
            raise ValueError(f"side length must be >= 2, got {self.N}")

    @property
    def site_count(self) -> int:
        return self.N ** self.d

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.d

    def index(self, coords) -> int:
        """Row-major site index of (possibly unwrapped) coordinates."""
        coords = np.mod(np.asarray(coords, dtype=np.int64), self.N)
        idx = 0
        for c in coords:
            idx = idx * self.N + int(c)
        return idx

    def coords(self, site: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.d):
            out.append(site % self.N)
            site //= self.N
        return tuple(reversed(out))

    def shift_table(self, offset) -> np.ndarray:
        """site -> index of site + offset, for all sites (int64 array)."""
        offset = np.asarray(offset, dtype=np.int64)
        if offset.shape != (self.d,):
            raise ValueError(f"offset must have {self.d} components")
        idx = np.arange(self.site_count, dtype=np.int64).reshape(self.shape)
        for axis, k in enumerate(offset):
            idx = np.roll(idx, -int(k), axis=axis)
        return idx.ravel()

    def neighbor_table(self) -> np.ndarray:
        """(2d, site_count) table: rows alternate +e_1, -e_1, +e_2, ...

        At N = 2 the +e_i and -e_i rows coincide (double bonds); both are
        kept so directed-edge sums count them twice.
        """
        rows = []
        for axis in range(self.d):
            e = np.zeros(self.d, dtype=np.int64)
            e[axis] = 1
            rows.append(self.shift_table(e))
            rows.append(self.shift_table(-e))
        return np.stack(rows)


@dataclass
class Configuration:
    """Occupancy variables, one bit per site."""

    lattice: TorusLattice
    occupancy: np.ndarray  # uint8, shape (site_count,)

    def __post_init__(self):
        occ = np.asarray(self.occupancy, dtype=np.uint8).ravel()
        if occ.size != self.lattice.site_count:
            raise ValueError("occupancy size does not match lattice")
        if np.any(occ > 1):
            raise ValueError("occupancy values must be 0 or 1")
        self.occupancy = occ

    @property
    def particle_count(self) -> int:
        return int(self.occupancy.sum())

    def copy(self) -> "Configuration":
        return Configuration(self.lattice, self.occupancy.copy())


@dataclass
class ScalarField:
    """One real value per lattice site."""

    lattice: TorusLattice
    values: np.ndarray  # float64, shape (site_count,)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64).ravel()
        if vals.size != self.lattice.site_count:
            raise ValueError("values size does not match lattice")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        self.values = vals

    def grid(self) -> np.ndarray:
        return self.values.reshape(self.lattice.shape)

    def copy(self) -> "ScalarField":
        return ScalarField(self.lattice, self.values.copy())

    @classmethod
    def constant(cls, lattice: TorusLattice, value: float) -> "ScalarField":
        return cls(lattice, np.full(lattice.site_count, float(value)))


def swap(cfg: Configuration, x: int, y: int) -> Configuration:
    """Exchange occupancies at sites x and y (fresh configuration)."""
    n = cfg.lattice.site_count
    if x == y:
        raise ValueError("swap requires two distinct sites")
    if not (0 <= x < n and 0 <= y < n):
        raise IndexError("site index out of range")
    out = cfg.copy()
    out.occupancy[x], out.occupancy[y] = out.occupancy[y], out.occupancy[x]
    return out


def flip(cfg: Configuration, x: int) -> Configuration:
    """Complement the occupancy at site x (fresh configuration)."""
    if not 0 <= x < cfg.lattice.site_count:
        raise IndexError("site index out of range")
    out = cfg.copy()
    out.occupancy[x] = 1 - out.occupancy[x]
    return out


def laplacian_grid(values: np.ndarray, N: int) -> np.ndarray:
    """N^2-scaled nearest-neighbor Laplacian on a (N,)*d grid array."""
    out = np.zeros_like(values)
    for axis in range(values.ndim):
        out += np.roll(values, -1, axis=axis) + np.roll(values, 1, axis=axis)
    out -= 2 * values.ndim * values
    return (N * N) * out


def discrete_laplacian(u: ScalarField) -> ScalarField:
    """Delta^N u: N^2 * sum over the 2d neighbor multiset of (u(y) - u(x))."""
    lat = u.lattice
    return ScalarField(lat, laplacian_grid(u.grid(), lat.N).ravel())


def discrete_gradient(u: ScalarField, x: int) -> np.ndarray:
    """Forward differences {N (u(x+e_i) - u(x))}_{i=1..d} at site x."""
    lat = u.lattice
    out = np.empty(lat.d)
    for axis in range(lat.d):
        e = np.zeros(lat.d, dtype=np.int64)
        e[axis] = 1
        xi = lat.index(np.asarray(lat.coords(x)) + e)
        out[axis] = lat.N * (u.values[xi] - u.values[x])
    return out


def gradient_field(u: ScalarField) -> np.ndarray:
    """All forward differences at once, shape (d, site_count)."""
    lat = u.lattice
    g = u.grid()
    rows = [lat.N * (np.roll(g, -1, axis=axis) - g).ravel() for axis in range(lat.d)]
    return np.stack(rows)


def sup_gradient_norm(u: ScalarField) -> float:
    """sup_x of the Euclidean norm of the forward-difference gradient."""
    g = gradient_field(u)
    return float(np.sqrt((g * g).sum(axis=0)).max())


# --- snapshot / dump formats (documented in the README) ---------------------


def write_snapshot(path, cfg: Configuration, time: float, seed: int) -> None:
    """Text snapshot: header 'd N time seed', then one '0'/'1' per site."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{cfg.lattice.d} {cfg.lattice.N} {float(time)!r} {seed}\n")
        fh.write("".join("1" if b else "0" for b in cfg.occupancy))
        fh.write("\n")


def read_snapshot(path) -> tuple[Configuration, float, int]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 4:
            raise ValueError(f"bad snapshot header in {path}")
        d, N, time, seed = int(header[0]), int(header[1]), float(header[2]), int(header[3])
        bits = fh.readline().strip()
    lat = TorusLattice(d, N)
    if len(bits) != lat.site_count:
        raise ValueError(f"snapshot body has {len(bits)} sites, expected {lat.site_count}")
    occ = np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
    return Configuration(lat, occ), time, seed


def write_field_csv(path, u: ScalarField) -> None:
    """CSV dump with columns site_index,value."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("site_index,value\n")
        for i, v in enumerate(u.values):
            fh.write(f"{i},{float(v)!r}\n")


def read_field_csv(path, lattice: TorusLattice) -> ScalarField:
    vals = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if vals.shape[0] != lattice.site_count:
        raise ValueError("field CSV row count does not match lattice")
    order = np.argsort(vals[:, 0])
    return ScalarField(lattice, vals[order, 1])
