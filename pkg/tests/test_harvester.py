import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wptsim.array_channel import ChannelRealization
from wptsim.errors import ConfigError
from wptsim.excitation import (ExcitationPlan, PowerEnvelope, adaptive_single_tone_plan,
                               synthesize_envelope)
from wptsim.harvester import (MULTI_TONE_CURVE, SINGLE_TONE_CURVE, EfficiencyCurve,
                              HarvesterModel, HarvestTrace, ParametricNonlinearity,
                              concat_traces, harvest_envelope, harvester_voltage, rf_to_dc)

SINGLE = HarvesterModel(SINGLE_TONE_CURVE)
MULTI = HarvesterModel(MULTI_TONE_CURVE)
PARAM = HarvesterModel(ParametricNonlinearity())
HARD = HarvesterModel(ParametricNonlinearity(10e-6, 0.5, 1e-3, "hard"))
MODELS = [SINGLE, MULTI, PARAM, HARD]


def test_top_single_tone_point():
    assert rf_to_dc(SINGLE, 24.6765328148914e-6) == pytest.approx(12.56e-6, abs=0.01e-6)
    assert rf_to_dc(SINGLE, 24.6765328148914e-6) / 24.6765328148914e-6 == pytest.approx(0.509, abs=5e-4)


def test_zero_input():
    for m in MODELS:
        assert rf_to_dc(m, 0.0) == 0.0


def test_log_log_interpolation_oracle():
    x0, y0, x1, y1 = 10.5238226401887e-6, 3.41778224120492e-6, 12.4856654643546e-6, 4.62544215112466e-6
    p = 11.0e-6
    w = (math.log(p) - math.log(x0)) / (math.log(x1) - math.log(x0))
    expected = math.exp(math.log(y0) + w * (math.log(y1) - math.log(y0)))
    got = rf_to_dc(SINGLE, p)
    assert got == pytest.approx(expected, rel=1e-12)
    assert 3.42e-6 < got < 4.63e-6


def test_curve_extrapolation():
    lo = SINGLE_TONE_CURVE.p_rf[0]
    assert rf_to_dc(SINGLE, 0.999 * lo) == 0.0
    hi = SINGLE_TONE_CURVE.p_rf[-1]
    assert rf_to_dc(SINGLE, 2 * hi) == pytest.approx(2 * SINGLE_TONE_CURVE.p_dc[-1], rel=1e-14)


def test_knots_exact():
    for curve in (SINGLE_TONE_CURVE, MULTI_TONE_CURVE):
        out = rf_to_dc(HarvesterModel(curve), curve.p_rf)
        np.testing.assert_array_equal(out, curve.p_dc)


@given(st.floats(0.0, 1e-2), st.floats(0.0, 1e-2))
def test_efficiency_bound_and_monotonicity(p1, p2):
    lo, hi = sorted((p1, p2))
    for m in MODELS:
        a, b = rf_to_dc(m, lo), rf_to_dc(m, hi)
        assert a <= lo and b <= hi
        assert a <= b * (1 + 1e-12)


def test_parametric_shape():
    par = ParametricNonlinearity(5e-6, 0.5, 1e-3)
    m = HarvesterModel(par)
    assert rf_to_dc(m, 4.99e-6) == 0.0
    assert rf_to_dc(m, 5e-6) == 0.0  # smoothstep starts at zero efficiency
    assert rf_to_dc(m, 1e-3) == pytest.approx(0.5e-3)
    assert rf_to_dc(m, 5e-3) == pytest.approx(0.5e-3)
    assert rf_to_dc(HARD, 10e-6) == pytest.approx(5e-6)


def test_parametric_validation():
    with pytest.raises(ConfigError):
        ParametricNonlinearity(1e-3, 0.5, 1e-4)
    with pytest.raises(ConfigError):
        ParametricNonlinearity(1e-6, 1.5, 1e-3)
    with pytest.raises(ConfigError):
        ParametricNonlinearity(transition="soft")


def test_curve_validation_and_csv():
    with pytest.raises(ConfigError):
        EfficiencyCurve([1e-6, 2e-6], [2e-6, 1e-6])  # p_dc > p_rf
    with pytest.raises(ConfigError):
        EfficiencyCurve([2e-6, 1e-6], [0.5e-6, 0.6e-6])
    back = EfficiencyCurve.from_csv(SINGLE_TONE_CURVE.to_csv())
    np.testing.assert_array_equal(back.p_rf, SINGLE_TONE_CURVE.p_rf)
    np.testing.assert_array_equal(back.p_dc, SINGLE_TONE_CURVE.p_dc)


def test_harvester_voltage():
    assert harvester_voltage(SINGLE, 0.0) == 0.0
    assert harvester_voltage(SINGLE, 10e-6, 324e3) == pytest.approx(1.8, rel=1e-12)
    assert harvester_voltage(SINGLE, 1e-3, 1e6) == 2.0
    v = harvester_voltage(SINGLE, np.linspace(0, 1e-3, 50))
    assert np.all(v <= 2.0)


def test_constant_envelope_is_memoryless():
    env = PowerEnvelope(100e3, np.full(1000, 21.0765063168423e-6))
    tr = harvest_envelope(SINGLE, env)
    assert len(tr) == 10 and tr.sample_rate == 1000.0
    np.testing.assert_allclose(tr.p_eh, 10.2900477634388e-6, rtol=1e-12)


def test_single_antenna_single_tone_at_fig_point():
    # a one-antenna plan has a constant envelope, so its mean DC is the curve value
    a = math.sqrt(21.0765063168423e-6)
    plan = adaptive_single_tone_plan(1, a, 5.0, 10.0, seed=1)
    env = synthesize_envelope(plan, ChannelRealization(np.array([1.0 + 0j])), 10.0, 1000.0)
    tr = harvest_envelope(SINGLE, env)
    assert tr.p_eh.mean() == pytest.approx(10.29e-6, abs=0.005e-6)


def test_beat_through_hard_threshold():
    # two equal tones: mean 2a^2, peak 4a^2; sensitivity between the two
    a2 = 3e-6
    plan = ExcitationPlan([math.sqrt(a2)] * 2, [0.0, 100.0], [0.0], [[0.0, 0.0]])
    ch = ChannelRealization(np.ones(2, dtype=complex))
    env = synthesize_envelope(plan, ch, 0.1, 100e3)
    model = HARD  # sensitivity 10 uW: above the 6 uW mean, below the 12 uW peak
    beat = harvest_envelope(model, env)
    flat = harvest_envelope(model, PowerEnvelope(100e3, np.full(env.samples.size, 2 * a2)))
    assert np.all(flat.p_eh == 0)
    # P(t) = 2a^2 (1 + cos x) >= 10e-6 for |x| <= acos(10/6 - 1)
    x0 = math.acos(10e-6 / (2 * a2) - 1)
    analytic = 0.5 * 2 * a2 * (2 * x0 + 2 * math.sin(x0)) / (2 * math.pi)
    assert beat.p_eh.mean() > 0
    assert beat.p_eh.mean() == pytest.approx(analytic, rel=5e-3)  # edge quantisation at 1000 samples per beat


def test_window_must_be_whole_samples():
    env = PowerEnvelope(1500.0, np.ones(30) * 1e-6)
    with pytest.raises(ConfigError):
        harvest_envelope(SINGLE, env)


def test_concat_traces():
    a = HarvestTrace(10.0, np.ones(3), np.ones(3))
    b = HarvestTrace(10.0, np.zeros(2), np.zeros(2))
    c = concat_traces([a, b])
    assert len(c) == 5
    with pytest.raises(ValueError):
        concat_traces([a, HarvestTrace(20.0, np.ones(1), np.ones(1))])
