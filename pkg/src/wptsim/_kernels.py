"""Hot inner loops.

Two kernels dominate runtime: the tone-sum that produces the received RF
envelope, and the buffer-capacitor recurrence that turns harvested power into
a voltage trajectory. Each has a numba-compiled version and a plain
numpy/Python version. The compiled one is used unless ``WPTSIM_DISABLE_NUMBA``
is set to a truthy value (or numba is not importable).

Both backends execute the same floating-point operations in the same order for
the recurrence, so their outputs are bit-identical. The envelope backends
differ in summation order and agree to ~1e-12 relative.
"""
import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_DISABLE = os.environ.get("WPTSIM_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")
USE_NUMBA = numba is not None and not _DISABLE

# step cases recorded per sample by the recurrence
CASE_DEPLETED = 0
CASE_HOLD = 1
CASE_ENERGY = 2
CASE_CEILING = 3

_ENVELOPE_CHUNK = 4096


def _njit(func):
    if numba is None:
        return func
    return numba.njit(cache=True, nogil=True)(func)


# ---------------------------------------------------------------- envelope

def _envelope_loop(t, coeff_re, coeff_im, freqs, out):
    n_ant = freqs.size
    for i in range(t.size):
        sr = 0.0
        si = 0.0
        ti = t[i]
        for k in range(n_ant):
            # reduce cycles before scaling by 2*pi to keep phase error ~1e-16
            cyc = freqs[k] * ti
            cyc = cyc - math.floor(cyc)
            ph = 2.0 * math.pi * cyc
            c = math.cos(ph)
            s = math.sin(ph)
            sr += coeff_re[k] * c - coeff_im[k] * s
            si += coeff_re[k] * s + coeff_im[k] * c
        out[i] = sr * sr + si * si
    return out


_envelope_loop_jit = _njit(_envelope_loop)


def envelope_power_numpy(t, coeffs, freqs):
    """|sum_k coeffs[k] * exp(j*2*pi*freqs[k]*t)|**2, vectorised in chunks."""
    t = np.ascontiguousarray(t, dtype=np.float64)
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    freqs = np.asarray(freqs, dtype=np.float64)
    out = np.empty(t.size)
    for i0 in range(0, t.size, _ENVELOPE_CHUNK):
        tt = t[i0:i0 + _ENVELOPE_CHUNK]
        cyc = np.multiply.outer(tt, freqs)
        cyc -= np.floor(cyc)
        s = np.exp(2j * np.pi * cyc) @ coeffs
        out[i0:i0 + tt.size] = s.real * s.real + s.imag * s.imag
    return out


def envelope_power_numba(t, coeffs, freqs):
    t = np.ascontiguousarray(t, dtype=np.float64)
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    freqs = np.ascontiguousarray(freqs, dtype=np.float64)
    out = np.empty(t.size)
    return _envelope_loop_jit(t, np.ascontiguousarray(coeffs.real),
                              np.ascontiguousarray(coeffs.imag), freqs, out)


# ---------------------------------------------------------------- recurrence

def _buffer_loop(p_eh, v_eh, start, stop, dt, c_b, v_th, v_bod, p_active,
                 load_v, load_p, pilot_steps, v0, active0, progress0, stop_at_pilot,
                 v_out, active_out, case_out, brown_out, progress_out):
    v = v0
    active = active0 or v0 >= v_th
    progress = progress0 if active0 else 0
    woke = -1
    sent = -1
    if active and not active0:
        woke = -2  # awake at t=0, before the first step
        if pilot_steps == 0:
            sent = -2
    has_curve = load_v.size > 0
    k = 0
    for n in range(start, stop):
        if active:
            p_load = p_active
        elif has_curve:
            p_load = np.interp(v, load_v, load_p)
        else:
            p_load = 0.0
        p_b = p_eh[n] - p_load
        arg = v * v + 2.0 * p_b * dt / c_b
        if arg < 0.0:
            v = 0.0
            case = 0
        elif p_b > 0.0 and v_eh[n] <= v:
            case = 1
        else:
            v_new = math.sqrt(arg)
            if p_b > 0.0 and v_new > v_eh[n]:
                v = v_eh[n]
                case = 3
            else:
                v = v_new
                case = 2

        brown = False
        if active:
            if v < v_bod:
                active = False
                progress = 0
                brown = True
            else:
                progress += 1
                if progress >= pilot_steps:
                    if sent == -1:
                        sent = k
                    progress = 0
        elif v >= v_th:
            active = True
            progress = 0
            if woke == -1:
                woke = k
            if pilot_steps == 0 and sent == -1:
                sent = k

        v_out[k] = v
        active_out[k] = active
        case_out[k] = case
        brown_out[k] = brown
        progress_out[k] = progress
        k += 1
        if stop_at_pilot and sent != -1:
            break
    return k, woke, sent


_buffer_loop_jit = _njit(_buffer_loop)


def _run_buffer(loop, p_eh, v_eh, start, stop, dt, c_b, v_th, v_bod, p_active,
                load_v, load_p, pilot_steps, v0, stop_at_pilot, active0=False, progress0=0):
    n = max(stop - start, 0)
    v_out = np.empty(n)
    active_out = np.empty(n, dtype=np.bool_)
    case_out = np.empty(n, dtype=np.int8)
    brown_out = np.empty(n, dtype=np.bool_)
    progress_out = np.empty(n, dtype=np.int64)
    k, woke, sent = loop(
        np.ascontiguousarray(p_eh, dtype=np.float64),
        np.ascontiguousarray(v_eh, dtype=np.float64),
        int(start), int(stop), float(dt), float(c_b), float(v_th), float(v_bod),
        float(p_active),
        np.ascontiguousarray(load_v, dtype=np.float64),
        np.ascontiguousarray(load_p, dtype=np.float64),
        int(pilot_steps), float(v0), bool(active0), int(progress0), bool(stop_at_pilot),
        v_out, active_out, case_out, brown_out, progress_out,
    )
    return (v_out[:k], active_out[:k], case_out[:k], brown_out[:k],
            progress_out[:k], int(woke), int(sent))


def buffer_recurrence_numpy(*args):
    """Reference (interpreted) recurrence; see :func:`buffer_recurrence`."""
    return _run_buffer(_buffer_loop, *args)


def buffer_recurrence_numba(*args):
    return _run_buffer(_buffer_loop_jit, *args)


if USE_NUMBA:
    envelope_power = envelope_power_numba
    _buffer_impl = buffer_recurrence_numba
else:
    envelope_power = envelope_power_numpy
    _buffer_impl = buffer_recurrence_numpy


def buffer_recurrence(*args):
    """Run the buffer recurrence over ``p_eh[start:stop]`` on the active backend.

    Arguments are ``(p_eh, v_eh, start, stop, dt, c_b, v_th, v_bod, p_active,
    load_v, load_p, pilot_steps, v0, stop_at_pilot[, active0, progress0])``.
    An empty ``load_v`` means an ideal MCU (no draw below threshold);
    ``active0``/``progress0`` resume a device that is already running.

    Returns ``(v, active, case, brownout, progress, woke, sent)``. ``woke`` and
    ``sent`` are step indices, -1 if the event never happened and -2 if it
    held before the first step.
    """
    return _buffer_impl(*args)
