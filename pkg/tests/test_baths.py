import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qheat.baths import (
    BathSpec,
    ModulationSpec,
    effective_beta,
    effective_boltzmann,
    response,
    sideband_rates,
)
from qheat.errors import InvalidConfig, NoCoupling, ZeroFrequency

from conftest import split_baths


def test_flat_band_response():
    bath = BathSpec("b", 1.0, band=(0.5, 2.0))
    assert response(bath, 1.0) == pytest.approx(math.e / (math.e - 1), rel=1e-14)
    assert response(bath, -1.0) == pytest.approx(math.exp(-1) * math.e / (math.e - 1), rel=1e-14)
    assert response(bath, 3.0) == 0.0


def test_band_is_half_open():
    bath = BathSpec("b", 1.0, band=(0.5, 2.0))
    assert response(bath, 0.5) > 0
    assert response(bath, 2.0) == 0.0


def test_zero_frequency_raises():
    with pytest.raises(ZeroFrequency):
        response(BathSpec("b", 1.0), 0.0)


def test_ohmic_and_table_models():
    ohm = BathSpec("o", 2.0, model="ohmic", kappa=0.3, cutoff=5.0)
    assert ohm.rate(1.0) == pytest.approx(0.3 * math.exp(-0.2))
    tab = BathSpec("t", 1.0, model="table", table=((0.0, 0.0), (1.0, 2.0), (2.0, 0.0)))
    assert tab.rate(0.5) == pytest.approx(1.0)
    assert tab.rate(1.5) == pytest.approx(1.0)
    assert tab.rate(2.5) == 0.0


def test_bad_bath_inputs():
    with pytest.raises(InvalidConfig):
        BathSpec("b", 0.0)
    with pytest.raises(InvalidConfig):
        BathSpec("b", 1.0, model="lorentzian")
    with pytest.raises(InvalidConfig):
        BathSpec("b", 1.0, model="table", table=((1.0, 1.0), (0.5, 1.0)))


def test_modulation_normalization():
    with pytest.raises(InvalidConfig):
        ModulationSpec(0.1, {-1: 0.5, 1: 0.4})
    with pytest.raises(InvalidConfig):
        ModulationSpec(0.1, {-1: 1.5, 1: -0.5})
    mod = ModulationSpec.from_pairs(0.1, [[1, 0.25], [-1, 0.25], [0, 0.5]])
    assert list(mod.weights) == [-1, 0, 1]
    assert sum(mod.weights.values()) == pytest.approx(1.0, abs=1e-15)


def test_sideband_must_be_positive():
    mod = ModulationSpec.two_sideband(1.5)
    with pytest.raises(InvalidConfig):
        sideband_rates(split_baths(), mod, 1.0)


def test_single_bath_no_modulation_gives_boltzmann():
    bath = BathSpec("b", 0.7)
    assert effective_boltzmann([bath], ModulationSpec.none(), 1.0) == pytest.approx(math.exp(-1 / 0.7), rel=1e-14)


def test_two_sideband_oracle_value():
    cold, hot = split_baths(0.5, 1.0)
    om = 1 / 3
    wc, wh = 1 - om, 1 + om
    gc = 1 / (1 - math.exp(-wc / 0.5))
    gh = 1 / (1 - math.exp(-wh / 1.0))
    expected = (gc * math.exp(-wc / 0.5) + gh * math.exp(-wh)) / (gc + gh)
    got = effective_boltzmann((cold, hot), ModulationSpec.two_sideband(om), 1.0)
    assert got == pytest.approx(expected, rel=1e-14)
    assert effective_beta((cold, hot), ModulationSpec.two_sideband(om), 1.0) == pytest.approx(-math.log(expected))


def test_decoupled_raises():
    bath = BathSpec("b", 1.0, band=(5.0, 6.0))
    with pytest.raises(NoCoupling):
        effective_boltzmann([bath], ModulationSpec.none(), 1.0)


@settings(max_examples=300, deadline=None)
@given(
    t=st.floats(0.05, 20.0),
    w=st.floats(1e-3, 30.0),
    model=st.sampled_from(["flat", "ohmic"]),
)
def test_kms_ratio(t, w, model):
    bath = BathSpec("b", t, model=model, cutoff=7.0)
    g = response(bath, w)
    if g > 0 and t * 700 > w:
        assert response(bath, -w) / g == pytest.approx(math.exp(-w / t), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(tc=st.floats(0.1, 5.0), th=st.floats(0.1, 5.0), om=st.floats(0.0, 0.9))
def test_effective_boltzmann_bounds_and_monotone(tc, th, om):
    # overlapping spectra: both baths see both sidebands
    mk = lambda t: BathSpec("b", t, gamma0=1.0)
    mod = ModulationSpec.two_sideband(om) if om > 0 else ModulationSpec.none()
    e0 = effective_boltzmann((mk(tc), mk(th)), mod, 1.0)
    assert 0 < e0 < 1
    assert effective_boltzmann((mk(tc * 1.05), mk(th)), mod, 1.0) > e0
    assert effective_boltzmann((mk(tc), mk(th * 1.05)), mod, 1.0) > e0
