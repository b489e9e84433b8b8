import numpy as np
import pytest

from gk.lattice import Configuration, ScalarField, TorusLattice
from gk.rates import (
    REFERENCE_SPEC_1D,
    REFERENCE_SPEC_2D,
    RateSpec,
    RateValidationError,
    glauber_rate,
    reaction_discrete,
    reaction_field,
    reaction_poly,
    validate,
)


def test_reference_roots():
    prof = validate(REFERENCE_SPEC_1D)
    assert abs(prof.alpha1 - 0.25) < 1e-12
    assert abs(prof.alpha_star - 0.5) < 1e-12
    assert abs(prof.alpha2 - 0.75) < 1e-12


def test_reference_c_max():
    assert REFERENCE_SPEC_1D.c_max() == 35.0


def test_reaction_poly_is_bernoulli_average():
    # E[(1 - 2 eta_0) c(eta)] under independent Bernoulli(rho) occupancies
    spec = REFERENCE_SPEC_1D
    for rho in (0.1, 0.37, 0.5, 0.9):
        acc = 0.0
        for e0 in (0, 1):
            for e1 in (0, 1):
                for e2 in (0, 1):
                    w = (
                        (rho if e0 else 1 - rho)
                        * (rho if e1 else 1 - rho)
                        * (rho if e2 else 1 - rho)
                    )
                    c = spec.rate_local(e0, e1, e2)
                    acc += w * (1 - 2 * e0) * c
        assert abs(acc - reaction_poly(spec, rho)) < 1e-12


def test_reaction_field_matches_sitewise():
    lat = TorusLattice(2, 4)
    rng = np.random.default_rng(0)
    u = ScalarField(lat, rng.random(lat.site_count))
    f = reaction_field(REFERENCE_SPEC_2D, u)
    for site in range(lat.site_count):
        assert abs(f[site] - reaction_discrete(REFERENCE_SPEC_2D, u, site)) < 1e-14


def test_reaction_field_at_constant_root_vanishes():
    lat = TorusLattice(1, 8)
    for root in (0.25, 0.5, 0.75):
        f = reaction_field(REFERENCE_SPEC_1D, ScalarField.constant(lat, root))
        assert np.abs(f).max() < 1e-12


def test_glauber_rate_reads_offsets():
    lat = TorusLattice(1, 5)
    cfg = Configuration(lat, np.array([0, 1, 1, 0, 0], dtype=np.uint8))
    # site 0 empty, reads sites 1 and 2 (both occupied): creation rate
    assert glauber_rate(REFERENCE_SPEC_1D, cfg, 0) == 32.0 + 3.0
    # site 1 occupied, reads sites 2 (occupied) and 3 (empty)
    assert glauber_rate(REFERENCE_SPEC_1D, cfg, 1) == -16.0 + 19.0


def test_validate_rejects_coincident_offsets():
    bad = RateSpec(32, 0, 3, 0, -16, 19, (1,), (1,))
    with pytest.raises(RateValidationError) as exc:
        validate(bad)
    assert exc.value.condition == "A1"


def test_validate_rejects_zero_offset():
    bad = RateSpec(32, 0, 3, 0, -16, 19, (0,), (2,))
    with pytest.raises(RateValidationError) as exc:
        validate(bad)
    assert exc.value.condition == "A1"


def test_validate_rejects_nonpositive_rate():
    bad = RateSpec(32, 0, 0, 0, -16, 19, (1,), (2,))  # c^+ = 0 at corner
    with pytest.raises(RateValidationError) as exc:
        validate(bad)
    assert exc.value.condition == "positivity"


def test_validate_rejects_monostable_cubic():
    # all-constant rates give a linear (non-bistable) reaction term
    bad = RateSpec(0, 0, 1, 0, 0, 1, (1,), (2,))
    with pytest.raises(RateValidationError):
        validate(bad)


def test_validate_rejects_unbalanced():
    # perturb one constant so the well integral no longer vanishes
    bad = RateSpec(32, 0, 3.2, 0, -16, 19, (1,), (2,))
    with pytest.raises(RateValidationError):
        validate(bad)


def test_validate_rejects_nonmonotone():
    # b_minus > 0 makes the annihilation rate increasing in u_{n1}
    bad = RateSpec(16, 0, 3, 16, 3, 3, (1,), (2,))
    with pytest.raises(RateValidationError):
        validate(bad)


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        RateSpec(32, 0, 3, 0, -16, 19, (1, 0), (2,))
