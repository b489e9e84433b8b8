import math

import numpy as np
import pytest

from gk import entropy
from gk.lattice import Configuration, ScalarField, TorusLattice
from gk.rates import REFERENCE_SPEC_1D, REFERENCE_SPEC_2D


def _random_case(lat, rng):
    u = ScalarField(lat, 0.15 + 0.7 * rng.random(lat.site_count))
    cfg = Configuration(lat, rng.integers(0, 2, lat.site_count).astype(np.uint8))
    return u, cfg


def test_all_states_codes_are_consistent():
    states = entropy.all_states(3)
    assert states.shape == (8, 3)
    for s in range(8):
        assert entropy.state_code(states[s]) == s


def test_product_measure_normalizes():
    lat = TorusLattice(1, 4)
    rng = np.random.default_rng(0)
    u, _ = _random_case(lat, rng)
    probs = entropy.ProductMeasure(u).state_probabilities()
    assert abs(probs.sum() - 1.0) < 1e-12
    assert np.all(probs > 0)


def test_product_measure_rejects_degenerate_means():
    lat = TorusLattice(1, 3)
    with pytest.raises(ValueError):
        entropy.ProductMeasure(ScalarField(lat, np.array([0.5, 1.0, 0.5])))


def test_exchange_adjoint_matches_enumeration():
    rng = np.random.default_rng(1)
    lat = TorusLattice(1, 5)
    Q = entropy.kawasaki_generator(lat)
    for _ in range(10):
        u, cfg = _random_case(lat, rng)
        nu = entropy.ProductMeasure(u)
        a = entropy.adjoint_kawasaki_one(u, cfg)
        b = entropy.brute_force_adjoint(Q, nu, cfg)
        assert abs(a - b) < 1e-10


def test_flip_adjoint_matches_enumeration_2d():
    rng = np.random.default_rng(2)
    lat = TorusLattice(2, 3)
    Q = entropy.glauber_generator(lat, REFERENCE_SPEC_2D)
    for _ in range(5):
        u, cfg = _random_case(lat, rng)
        nu = entropy.ProductMeasure(u)
        g = entropy.adjoint_glauber_one(REFERENCE_SPEC_2D, u, cfg)
        assert abs(g["direct"] - entropy.brute_force_adjoint(Q, nu, cfg)) < 1e-10
        assert abs(g["direct"] - g["F"] - g["linear"]) < 1e-10


def test_generators_conserve_probability():
    lat = TorusLattice(1, 4)
    QK = entropy.kawasaki_generator(lat)
    QG = entropy.glauber_generator(lat, REFERENCE_SPEC_1D, 2.0)
    assert np.abs(QK.sum(axis=1)).max() < 1e-12
    assert np.abs(QG.sum(axis=1)).max() < 1e-12
    # off-diagonal rates nonnegative
    assert (QK - np.diag(np.diag(QK))).min() >= 0
    assert (QG - np.diag(np.diag(QG))).min() >= 0


def test_relative_entropy_properties():
    lat = TorusLattice(1, 6)
    rng = np.random.default_rng(3)
    mu = ScalarField(lat, 0.2 + 0.6 * rng.random(6))
    nu = ScalarField(lat, 0.2 + 0.6 * rng.random(6))
    assert entropy.relative_entropy_product(mu, mu) == 0.0
    assert entropy.relative_entropy_product(mu, nu) > 0.0
    det = ScalarField(lat, np.concatenate([[0.0], mu.values[1:]]))
    assert entropy.relative_entropy_product(mu, det) == math.inf


def test_entropy_proxy_zero_when_equal():
    lat = TorusLattice(1, 8)
    fields = np.full((3, 8), 0.4)
    out = entropy.entropy_proxy(fields, fields.copy(), lat)
    assert np.abs(out).max() < 1e-12


def test_window_square_is_probability():
    for ell, d in ((4, 1), (3, 2)):
        q = entropy.window_square(ell, d)
        assert q.shape == (2 * ell - 1,) * d
        assert abs(q.sum() - 1.0) < 1e-12


def test_flow_divergence_exact_small():
    for ell, d in ((1, 1), (2, 1), (5, 1), (3, 2), (2, 3)):
        flow = entropy.flow_construct(ell, d)
        assert np.abs(flow.target_discrepancy()).max() < 1e-13


def test_flow_cost_positive_and_growing_in_1d():
    costs = [entropy.flow_cost(entropy.flow_construct(l, 1)) for l in (4, 8, 16)]
    assert costs[0] > 0
    assert costs[0] < costs[1] < costs[2]


def test_window_averages_of_constant():
    lat = TorusLattice(1, 16)
    g = np.full(16, 2.5)
    assert np.allclose(entropy.left_average(g, lat, 4), 2.5)
    assert np.allclose(entropy.right_average(g, lat, 4), 2.5)


def test_h_field_identity_1d():
    rng = np.random.default_rng(4)
    lat = TorusLattice(1, 32)
    for term in ("a", "b", "c"):
        u, cfg = _random_case(lat, rng)
        hk = entropy.h_field_identity(REFERENCE_SPEC_1D, u, cfg, 2, term, rng=rng)
        assert hk.residual < 1e-9
        assert hk.exchange_invariance_error == 0.0


def test_h_field_identity_rejects_small_lattice():
    rng = np.random.default_rng(5)
    lat = TorusLattice(1, 8)
    u, cfg = _random_case(lat, rng)
    with pytest.raises(ValueError):
        entropy.h_field_identity(REFERENCE_SPEC_1D, u, cfg, 2)


def test_binomial_lmgf_small_case_by_hand():
    # n = 1, p = 1/2: E exp(gamma (X - 1/2)^2) = exp(gamma / 4)
    val = entropy.binomial_square_lmgf(1, 0.8)
    assert abs(val - 0.8 * 0.25) < 1e-12


def test_concentration_monte_carlo_holds():
    rng = np.random.default_rng(6)
    intervals = [(0.0, 1.0)] * 20
    check = entropy.concentration_check(intervals, 0.5 / 20.0, 20000, rng)
    assert check.holds


def test_concentration_rejects_oversized_gamma():
    with pytest.raises(ValueError):
        entropy.concentration_check([(0.0, 1.0)] * 4, 1.0, 100)


def test_dirichlet_forms_nonnegative_and_zero_on_constants():
    lat = TorusLattice(1, 4)
    rng = np.random.default_rng(7)
    u, _ = _random_case(lat, rng)
    nu = entropy.ProductMeasure(u)
    const = np.ones(2**4)
    dk, dg = entropy.dirichlet_forms(const, lat, REFERENCE_SPEC_1D, nu)
    assert dk == 0.0 and dg == 0.0
    f = rng.random(2**4)
    dk, dg = entropy.dirichlet_forms(f, lat, REFERENCE_SPEC_1D, nu)
    assert dk > 0.0 and dg > 0.0
