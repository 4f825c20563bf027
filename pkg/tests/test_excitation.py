import math

import numpy as np
import pytest

from wptsim.array_channel import ChannelRealization, ceiling_grid, sample_channel
from wptsim.errors import ConfigError
from wptsim.excitation import (ExcitationPlan, adaptive_single_tone_plan, iter_envelope_chunks,
                               mean_received_power, multi_tone_plan, synthesize_envelope)


def unit_channel(n, g=1.0):
    return ChannelRealization(np.full(n, complex(g)))


def test_single_tone_plan_shape():
    plan = adaptive_single_tone_plan(84, 0.1, 5.0, 1800.0, seed=1)
    assert plan.n_epochs == 360
    assert np.all(plan.frequency_offsets == 0)
    assert np.all((plan.phases >= 0) & (plan.phases < 2 * math.pi))
    np.testing.assert_array_equal(plan.epoch_starts, np.arange(360) * 5.0)


def test_plans_are_deterministic():
    a = adaptive_single_tone_plan(8, 1.0, seed=4)
    b = adaptive_single_tone_plan(8, 1.0, seed=4)
    np.testing.assert_array_equal(a.phases, b.phases)
    np.testing.assert_array_equal(multi_tone_plan(8, 1.0, seed=4).phases,
                                  multi_tone_plan(8, 1.0, seed=4).phases)


def test_multi_tone_offsets():
    plan = multi_tone_plan(84, 1.0, 100.0, seed=0)
    np.testing.assert_array_equal(plan.frequency_offsets, np.arange(84) * 100.0)
    assert plan.frequency_offsets[-1] == 8300.0
    assert plan.n_epochs == 1


@pytest.mark.parametrize("make", [lambda: adaptive_single_tone_plan(0, 1.0),
                                  lambda: multi_tone_plan(0, 1.0),
                                  lambda: multi_tone_plan(2, 1.0, spacing=0.0),
                                  lambda: adaptive_single_tone_plan(2, 1.0, dwell=5.0, duration=1.0)])
def test_plan_argument_errors(make):
    with pytest.raises(ConfigError):
        make()


def test_single_antenna_envelope_is_constant():
    plan = adaptive_single_tone_plan(1, 0.3, 5.0, 10.0, seed=9)
    env = synthesize_envelope(plan, unit_channel(1, 0.5), 10.0, 1000.0)
    np.testing.assert_allclose(env.samples, 0.09 * 0.25, rtol=1e-14)
    env = synthesize_envelope(multi_tone_plan(1, 0.3, seed=3), unit_channel(1, 0.5), 1.0, 1000.0)
    np.testing.assert_allclose(env.samples, 0.09 * 0.25, rtol=1e-14)


def test_two_tone_beat_closed_form():
    a, g = 0.2, 0.7
    plan = ExcitationPlan([a, a], [0.0, 100.0], [0.0], [[0.0, 0.0]])
    env = synthesize_envelope(plan, unit_channel(2, g), 0.05, 10_000.0, use_periodicity=False)
    t = env.times
    expected = 2 * a * a * g * g * (1 + np.cos(2 * math.pi * 100 * t))
    np.testing.assert_allclose(env.samples, expected, rtol=1e-12, atol=1e-15)
    assert env.samples.max() == pytest.approx(4 * a * a * g * g, rel=1e-12)
    assert env.samples.mean() == pytest.approx(2 * a * a * g * g, rel=1e-9)


def test_coherent_sum_is_n_squared():
    n, a = 10, 0.1
    plan = ExcitationPlan(np.full(n, a), np.zeros(n), [0.0], np.zeros((1, n)))
    env = synthesize_envelope(plan, unit_channel(n, 0.3), 0.01, 1000.0)
    np.testing.assert_allclose(env.samples, n * n * a * a * 0.09, rtol=1e-13)


def test_periodic_fast_path_matches_direct():
    ch = sample_channel(ceiling_grid(), (1.2, 3.1, 0.0))
    plan = multi_tone_plan(84, 0.05, seed=11)
    fast = synthesize_envelope(plan, ch, 0.1, 100e3, start_time=0.37)
    slow = synthesize_envelope(plan, ch, 0.1, 100e3, start_time=0.37, use_periodicity=False)
    np.testing.assert_allclose(fast.samples, slow.samples, rtol=1e-9, atol=1e-12 * slow.samples.max())


def test_chunking_does_not_change_values():
    ch = sample_channel(ceiling_grid(), (1.2, 3.1, 0.0))
    for plan in (multi_tone_plan(84, 0.05, seed=1), adaptive_single_tone_plan(84, 0.05, 0.3, 2.0, 1)):
        whole = synthesize_envelope(plan, ch, 1.0, 40e3)
        parts = np.concatenate([e.samples for e in iter_envelope_chunks(plan, ch, 1.0, 40e3, 0.13)])
        np.testing.assert_allclose(parts, whole.samples, rtol=1e-9, atol=1e-12 * whole.samples.max())


def test_single_tone_piecewise_constant():
    ch = sample_channel(ceiling_grid(), (1.2, 3.1, 0.0))
    plan = adaptive_single_tone_plan(84, 0.05, 0.1, 0.5, seed=2)
    env = synthesize_envelope(plan, ch, 0.5, 1000.0)
    changes = np.flatnonzero(np.diff(env.samples) != 0) + 1
    assert set(changes.tolist()) <= {100, 200, 300, 400}


def test_peak_bounded_by_triangle_inequality():
    ch = sample_channel(ceiling_grid(), (1.2, 3.1, 0.0))
    plan = multi_tone_plan(84, 0.05, seed=5)
    env = synthesize_envelope(plan, ch, 0.01, 100e3)
    bound = np.sum(plan.amplitudes * np.abs(ch.gains)) ** 2
    assert env.samples.max() <= bound * (1 + 1e-12)


def test_one_beat_period_average_equals_sum_of_tone_powers():
    ch = sample_channel(ceiling_grid(), (1.2, 3.1, 0.0))
    plan = multi_tone_plan(84, 0.05, seed=5)
    env = synthesize_envelope(plan, ch, 0.01, 100e3)
    assert env.samples.mean() == pytest.approx(mean_received_power(plan, ch), rel=1e-9)


def test_synthesis_errors():
    plan = multi_tone_plan(4, 1.0)
    with pytest.raises(ConfigError):
        synthesize_envelope(plan, unit_channel(3), 1.0, 10e3)
    with pytest.raises(ConfigError):
        synthesize_envelope(plan, unit_channel(4), 1.0, 1000.0)  # 300 Hz max offset needs 1.2 kHz
    with pytest.raises(ConfigError):
        synthesize_envelope(plan, unit_channel(4), 1e-6, 10e3)


def test_plan_validation():
    with pytest.raises(ConfigError):
        ExcitationPlan([1.0], [0.0], [0.0, 0.0], [[0.0], [0.0]])
    with pytest.raises(ConfigError):
        ExcitationPlan([1.0], [0.0], [0.0], [[2 * math.pi]])
    with pytest.raises(ConfigError):
        ExcitationPlan([-1.0], [0.0], [0.0], [[0.0]])


def test_envelope_csv_header():
    env = synthesize_envelope(multi_tone_plan(1, 1.0), unit_channel(1), 0.003, 1000.0)
    lines = env.to_csv().splitlines()
    assert lines[0] == "t_s,p_rf_w"
    assert len(lines) == 4
