"""Independent reference computations used by the tests."""
import math

import numpy as np


def on_off_power(p_on, on_s, off_s, seconds, rate):
    n = int(round(seconds * rate))
    k = np.arange(n)
    phase = (k % int(round((on_s + off_s) * rate)))
    return np.where(phase < int(round(on_s * rate)), p_on, 0.0)


def brute_force_response(p_eh, rate, c_b, v_th, pilot_s):
    """Response time from every start index for an ideal MCU and v_eh above v_th.

    Below threshold nothing is drawn, so the buffer energy is the running sum
    of harvested energy; the device wakes on the first step whose cumulative
    energy reaches 0.5*C*v_th^2 and answers a pilot later. Returns
    ``(times, censored)`` with censored trials set to the remaining duration.
    """
    dt = 1.0 / rate
    n = p_eh.size
    e_th = 0.5 * c_b * v_th * v_th
    cum = np.concatenate(([0.0], np.cumsum(p_eh * dt)))
    pilot_steps = int(math.ceil(pilot_s / dt - 1e-9))
    starts = np.arange(n)
    # first step whose cumulative energy reaches the threshold, per start
    j = np.searchsorted(cum, cum[:n] + e_th * (1 - 1e-12), side="left")
    steps = j - starts + pilot_steps
    censored = (j > n) | (starts + steps > n)
    times = np.where(censored, (n - starts) * dt, steps * dt)
    return times, censored


def nearest_rank_population(times, censored, q):
    ranked = np.sort(np.where(censored, np.inf, times))
    rank = max(1, math.ceil(q / 100.0 * ranked.size - 1e-12))
    return ranked[rank - 1]
