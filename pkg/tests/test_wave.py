import math

import numpy as np
import pytest

from gk.rates import REFERENCE_SPEC_1D
from gk.wave import WaveError, WaveTable, shifted_roots, solve_wave


def test_shifted_roots_at_zero():
    lo, mid, hi = shifted_roots(REFERENCE_SPEC_1D, 0.0)
    assert abs(lo - 0.25) < 1e-9
    assert abs(mid - 0.5) < 1e-9
    assert abs(hi - 0.75) < 1e-9


def test_shifted_roots_move_with_delta():
    lo0, _, hi0 = shifted_roots(REFERENCE_SPEC_1D, 0.0)
    lo1, _, hi1 = shifted_roots(REFERENCE_SPEC_1D, 0.1)
    # a positive source raises both stable branches
    assert lo1 > lo0 and hi1 > hi0


def test_shifted_roots_reject_large_delta():
    with pytest.raises(WaveError):
        shifted_roots(REFERENCE_SPEC_1D, 10.0)


def test_balanced_wave_is_standing_tanh():
    sol = solve_wave(REFERENCE_SPEC_1D)
    assert abs(sol.speed) < 1e-8
    z = np.linspace(-8, 8, 4001)
    exact = 0.5 + 0.25 * np.tanh(z)
    assert np.abs(sol(z) - exact).max() < 1e-6


def test_wave_residual_small():
    sol = solve_wave(REFERENCE_SPEC_1D)
    assert sol.residual() < 1e-6


def test_wave_normalization_and_monotonicity():
    sol = solve_wave(REFERENCE_SPEC_1D, 0.03)
    assert abs(float(sol(0.0)) - 0.5 * (sol.lower + sol.upper)) < 1e-9
    z = np.linspace(sol.z[0], sol.z[-1], 2000)
    assert np.all(np.diff(sol(z)) >= -1e-12)


def test_wave_asymptotes_clamped():
    sol = solve_wave(REFERENCE_SPEC_1D)
    assert float(sol(-1e6)) == sol.lower
    assert float(sol(1e6)) == sol.upper


def test_speed_sign_follows_source_sign():
    # with a positive source the upper phase invades: the front moves so
    # that U(z - ct) sweeps leftward, giving c < 0 in this convention
    plus = solve_wave(REFERENCE_SPEC_1D, 0.05)
    minus = solve_wave(REFERENCE_SPEC_1D, -0.05)
    assert plus.speed < -1e-3
    assert minus.speed > 1e-3
    assert abs(plus.speed + minus.speed) < 1e-6  # odd in delta by symmetry


def test_wave_table_caches():
    table = WaveTable(REFERENCE_SPEC_1D)
    a = table.get(0.0)
    b = table.get(0.0)
    assert a is b
    c = table.get(0.01)
    assert c is not a
