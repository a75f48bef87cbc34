import math

import pytest

from scatterspin.errors import ValidationError
from scatterspin.rates import (
    CaLaserParams,
    ScatteringRates,
    ca_stark_and_rates,
    derive_rates,
)


def test_zero_rates_give_zero_derived():
    d = derive_rates(ScatteringRates())
    for name in ("gamma", "gamma_l", "gamma_r", "gamma_b", "gamma_0", "gamma_1",
                 "lam", "delta", "delta_l"):
        assert getattr(d, name) == 0.0


def test_symmetric_leakage():
    d = derive_rates(ScatteringRates(gamma_0g=2.0, gamma_1g=2.0))
    assert d.gamma_l == 2.0
    assert d.lam == 2.0
    assert d.delta == 0.0
    assert d.delta_l == 0.0


def test_hand_evaluated_case():
    d = derive_rates(ScatteringRates(1.0, 3.0, 2.0, 4.0, 6.0))
    assert d.gamma_0 == 3.0
    assert d.gamma_1 == 7.0
    assert d.lam == 5.0
    assert d.delta == -2.0
    assert d.gamma == 8.0
    assert d.gamma_b == (1 * 4 + 3 * 2) / 2
    assert d.gamma_l == 3.0
    assert d.gamma_r == 2.0
    assert d.delta_l == -1.0


def test_negative_rate_rejected():
    with pytest.raises(ValidationError):
        ScatteringRates(gamma_01=-0.1)
    with pytest.raises(ValidationError):
        ScatteringRates(gamma_el=float("nan"))


def test_linearity(rng):
    base = ScatteringRates(*rng.uniform(0.1, 2.0, 5))
    d1 = derive_rates(base)
    d2 = derive_rates(base.scaled(3.0))
    for name in ("gamma", "gamma_l", "gamma_r", "gamma_0", "gamma_1", "lam",
                 "delta", "delta_l"):
        assert getattr(d2, name) == pytest.approx(3.0 * getattr(d1, name), rel=1e-14)
    # the Raman-then-leak rate is bilinear
    assert d2.gamma_b == pytest.approx(9.0 * d1.gamma_b, rel=1e-14)


# ----------------------------------------------------------------------
# Ca+ Stark shift / scattering calculator
# ----------------------------------------------------------------------


def test_zero_power():
    stark, rates = ca_stark_and_rates(CaLaserParams(power=0.0, waist=1e-4))
    assert stark == 0.0
    assert rates.total == 0.0


def test_linearity_in_power():
    s1, r1 = ca_stark_and_rates(CaLaserParams(power=0.05, waist=1e-4))
    s2, r2 = ca_stark_and_rates(CaLaserParams(power=0.10, waist=1e-4))
    assert s2 == pytest.approx(2 * s1, rel=1e-14)
    assert r2.gamma_0g == pytest.approx(2 * r1.gamma_0g, rel=1e-14)
    assert r2.gamma_el == pytest.approx(2 * r1.gamma_el, rel=1e-14)
    assert r2.gamma_01 == pytest.approx(2 * r1.gamma_01, rel=1e-14)


def test_branching_split():
    _, rates = ca_stark_and_rates(CaLaserParams.representative())
    total = rates.total
    assert rates.gamma_0g / total == pytest.approx(0.945, rel=1e-12)
    assert rates.gamma_el / total == pytest.approx(0.016, rel=1e-12)
    assert rates.gamma_01 / total == pytest.approx(0.039, rel=1e-12)


def test_selection_rule():
    _, rates = ca_stark_and_rates(CaLaserParams.representative())
    assert rates.gamma_10 == 0.0
    assert rates.gamma_1g == 0.0


def test_representative_regime():
    # the published simulations quote total single-ion rates below 11 / s
    _, rates = ca_stark_and_rates(CaLaserParams.representative())
    assert 0.0 < rates.total < 11.0


def test_validation():
    with pytest.raises(ValidationError):
        CaLaserParams(power=0.05, waist=0.0)
    with pytest.raises(ValidationError):
        CaLaserParams(power=0.05, waist=1e-4, detuning=0.0)
    with pytest.raises(ValidationError):
        CaLaserParams(power=0.05, waist=1e-4,
                      branching={"leak": 0.9, "elastic": 0.06, "raman": 0.039})
    # stark shift flips sign with detuning, rates stay positive
    s_red, r_red = ca_stark_and_rates(
        CaLaserParams(power=0.05, waist=1e-4, detuning=-2 * math.pi * 1e12)
    )
    assert s_red < 0
    assert r_red.total > 0
