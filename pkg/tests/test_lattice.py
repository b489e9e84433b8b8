import numpy as np
import pytest

from gk.lattice import (
    Configuration,
    ScalarField,
    TorusLattice,
    discrete_gradient,
    discrete_laplacian,
    flip,
    gradient_field,
    laplacian_grid,
    read_field_csv,
    read_snapshot,
    sup_gradient_norm,
    swap,
    write_field_csv,
    write_snapshot,
)


def test_index_coords_roundtrip():
    lat = TorusLattice(3, 4)
    for site in range(lat.site_count):
        assert lat.index(lat.coords(site)) == site


def test_index_wraps():
    lat = TorusLattice(2, 5)
    assert lat.index((5, -1)) == lat.index((0, 4))


def test_shift_table_matches_scalar_indexing():
    lat = TorusLattice(2, 4)
    table = lat.shift_table((1, 2))
    for site in range(lat.site_count):
        c = np.asarray(lat.coords(site)) + np.array([1, 2])
        assert table[site] == lat.index(c)


def test_neighbor_table_double_bond_at_N2():
    lat = TorusLattice(1, 2)
    nbr = lat.neighbor_table()
    assert nbr.shape == (2, 2)
    # +e and -e point to the same site: the bond is counted twice
    assert np.array_equal(nbr[0], nbr[1])


def test_laplacian_of_linear_function_on_fine_grid():
    lat = TorusLattice(1, 64)
    x = np.arange(64) / 64
    u = ScalarField(lat, np.sin(2 * np.pi * x))
    lap = discrete_laplacian(u).values
    exact = -(2 * np.pi) ** 2 * np.sin(2 * np.pi * x)
    assert np.abs(lap - exact).max() < 0.05


def test_laplacian_annihilates_constants():
    lat = TorusLattice(2, 5)
    u = ScalarField.constant(lat, 0.37)
    assert np.abs(discrete_laplacian(u).values).max() == 0.0


def test_gradient_field_matches_sitewise():
    lat = TorusLattice(2, 4)
    rng = np.random.default_rng(0)
    u = ScalarField(lat, rng.random(lat.site_count))
    g = gradient_field(u)
    for site in range(lat.site_count):
        assert np.allclose(g[:, site], discrete_gradient(u, site))


def test_sup_gradient_norm_constant_zero():
    lat = TorusLattice(2, 8)
    assert sup_gradient_norm(ScalarField.constant(lat, 0.5)) == 0.0


def test_swap_and_flip_are_pure():
    lat = TorusLattice(1, 4)
    cfg = Configuration(lat, np.array([1, 0, 0, 1], dtype=np.uint8))
    out = swap(cfg, 0, 1)
    assert list(cfg.occupancy) == [1, 0, 0, 1]
    assert list(out.occupancy) == [0, 1, 0, 1]
    out2 = flip(cfg, 2)
    assert list(cfg.occupancy) == [1, 0, 0, 1]
    assert list(out2.occupancy) == [1, 0, 1, 1]


def test_swap_rejects_same_site():
    lat = TorusLattice(1, 4)
    cfg = Configuration(lat, np.zeros(4, dtype=np.uint8))
    with pytest.raises(ValueError):
        swap(cfg, 1, 1)


def test_configuration_rejects_non_binary():
    lat = TorusLattice(1, 3)
    with pytest.raises(ValueError):
        Configuration(lat, np.array([0, 1, 2], dtype=np.uint8))


def test_snapshot_roundtrip(tmp_path):
    lat = TorusLattice(2, 3)
    rng = np.random.default_rng(1)
    cfg = Configuration(lat, rng.integers(0, 2, lat.site_count).astype(np.uint8))
    path = tmp_path / "snap.txt"
    write_snapshot(path, cfg, 0.125, 42)
    cfg2, t, seed = read_snapshot(path)
    assert np.array_equal(cfg.occupancy, cfg2.occupancy)
    assert t == 0.125 and seed == 42


def test_field_csv_roundtrip(tmp_path):
    lat = TorusLattice(1, 6)
    rng = np.random.default_rng(2)
    u = ScalarField(lat, rng.random(6))
    path = tmp_path / "field.csv"
    write_field_csv(path, u)
    u2 = read_field_csv(path, lat)
    assert np.array_equal(u.values, u2.values)


def test_laplacian_grid_scaling():
    # doubling N quadruples the operator on the same profile shape
    for N in (8, 16):
        x = np.arange(N) / N
        g = np.cos(2 * np.pi * x)
        lap = laplacian_grid(g, N)
        exact = -(2 * np.pi) ** 2 * g
        assert np.abs(lap - exact).max() < 40.0 / N**2 * (2 * np.pi) ** 2
