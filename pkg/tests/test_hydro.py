import numpy as np
import pytest

from gk.hydro import (
    BlowUpError,
    check_comparison,
    energy_bound_constant,
    energy_report,
    gradient_report,
    heat_kernel_solution,
    integrate,
    stable_dt,
)
from gk.lattice import ScalarField, TorusLattice, sup_gradient_norm
from gk.rates import REFERENCE_SPEC_1D, REFERENCE_SPEC_2D, RateSpec


def test_heat_kernel_agreement_without_reaction():
    lat = TorusLattice(1, 32)
    rng = np.random.default_rng(0)
    u0 = ScalarField(lat, rng.random(32))
    run = integrate(u0, REFERENCE_SPEC_1D, 0.0, 0.005, t_out=[0.005])
    exact = heat_kernel_solution(u0, 0.005)
    assert np.abs(run.fields[-1] - exact).max() < 1e-6


def test_stable_root_is_stationary():
    lat = TorusLattice(1, 16)
    for root in (0.25, 0.75):
        u0 = ScalarField.constant(lat, root)
        run = integrate(u0, REFERENCE_SPEC_1D, 4.0, 0.01, t_out=[0.01])
        assert np.abs(run.fields[-1] - root).max() < 1e-12


def test_unstable_root_repels():
    lat = TorusLattice(1, 16)
    u0 = ScalarField.constant(lat, 0.5 + 1e-3)
    run = integrate(u0, REFERENCE_SPEC_1D, 50.0, 0.05, t_out=[0.05])
    assert run.fields[-1].min() > 0.6  # moved toward the upper stable root


def test_oversized_dt_rejected():
    lat = TorusLattice(1, 16)
    u0 = ScalarField.constant(lat, 0.5)
    bound = stable_dt(lat, REFERENCE_SPEC_1D, 1.0)
    with pytest.raises(ValueError):
        integrate(u0, REFERENCE_SPEC_1D, 1.0, 0.01, dt=2 * bound)


def test_blow_up_detected():
    # a constant-source reaction term (c^- < 0 is never validated away at
    # this layer) pushes the field past the range guard
    lat = TorusLattice(1, 4)
    wild = RateSpec(0, 0, 1000, 0, 0, -1000, (1,), (2,))
    u0 = ScalarField.constant(lat, 0.5)
    with pytest.raises(BlowUpError):
        integrate(u0, wild, 1.0, 1.0, t_out=[1.0])


def test_rk4_euler_agree_to_order():
    lat = TorusLattice(1, 32)
    rng = np.random.default_rng(1)
    u0 = ScalarField(lat, 0.2 + 0.6 * rng.random(32))
    a = integrate(u0, REFERENCE_SPEC_1D, 2.0, 0.01, scheme="rk4", t_out=[0.01])
    b = integrate(u0, REFERENCE_SPEC_1D, 2.0, 0.01, scheme="explicit-euler", t_out=[0.01])
    assert np.abs(a.fields[-1] - b.fields[-1]).max() < 1e-3


def test_comparison_principle_simple_pair():
    lat = TorusLattice(1, 32)
    rng = np.random.default_rng(2)
    lo = ScalarField(lat, 0.3 * rng.random(32))
    hi = ScalarField(lat, lo.values + 0.2)
    ok, viol = check_comparison(lo, hi, REFERENCE_SPEC_1D, 2.0, 0.01)
    assert ok and viol <= 1e-9


def test_comparison_rejects_unordered_input():
    lat = TorusLattice(1, 8)
    lo = ScalarField.constant(lat, 0.6)
    hi = ScalarField.constant(lat, 0.4)
    with pytest.raises(ValueError):
        check_comparison(lo, hi, REFERENCE_SPEC_1D, 1.0, 0.01)


def test_energy_bound_constant_reference():
    # max over the unit cube of |u_x f^N|; brute force grid oracle
    C = energy_bound_constant(REFERENCE_SPEC_1D)
    grid = np.linspace(0, 1, 101)
    worst = 0.0
    for u1 in (0.0, 1.0):
        for u2 in (0.0, 1.0):
            cp = REFERENCE_SPEC_1D.c_plus_local(u1, u2)
            cm = REFERENCE_SPEC_1D.c_minus_local(u1, u2)
            worst = max(worst, np.abs(grid * ((1 - grid) * cp - grid * cm)).max())
    assert C >= worst - 1e-9


def test_energy_report_holds_on_smooth_run():
    lat = TorusLattice(2, 32)
    x = np.arange(32) / 32
    g = 0.5 + 0.25 * np.sin(2 * np.pi * x)[:, None] * np.cos(2 * np.pi * x)[None, :]
    u0 = ScalarField(lat, g.ravel())
    run = integrate(u0, REFERENCE_SPEC_2D, 2.0, 0.01, t_out=np.linspace(0.001, 0.01, 10))
    assert energy_report(run).holds


def test_gradient_report_fits_envelope():
    lat = TorusLattice(1, 64)
    x = np.arange(64) / 64
    u0 = ScalarField(lat, 0.5 + 0.2 * np.sin(2 * np.pi * x))
    K = 2.0
    run = integrate(u0, REFERENCE_SPEC_1D, K, 0.01, t_out=np.linspace(0.002, 0.01, 5))
    C0 = sup_gradient_norm(u0) / K
    rep = gradient_report(run, C0 * (1 + 1e-9), K)
    assert np.all(rep.sup_gradient <= K * (rep.C0 + rep.fitted_C * np.sqrt(rep.t_out)) + 1e-9)


def test_t_out_validation():
    lat = TorusLattice(1, 8)
    u0 = ScalarField.constant(lat, 0.5)
    with pytest.raises(ValueError):
        integrate(u0, REFERENCE_SPEC_1D, 1.0, 0.01, t_out=[0.02])
    with pytest.raises(ValueError):
        integrate(u0, REFERENCE_SPEC_1D, 1.0, 0.01, t_out=[0.005, 0.003])
