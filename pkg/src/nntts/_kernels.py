"""Hot numeric kernels, compiled with numba when available.

Every kernel exists twice: a ``*_py`` pure-numpy implementation and, when
numba is importable and ``NNTTS_PURE_NUMPY`` is not set, an ``@njit``-compiled
loop version. The public names (``dp_fill``, ``pulse_train``, ``fir_stream``,
``allpole_stream``) are bound to whichever path is active; ``USING_NUMBA``
reports the selection. ``benchmarks/bench_kernels.py`` compares the two paths.

The two paths agree to float accumulation order wherever feasible; the
pulse-train pair can differ by one sample on exact integer phase crossings
because numpy's cumsum rounds prefix sums differently from sequential
addition. Each path is individually deterministic.
"""

from __future__ import annotations

import os

import numpy as np

_env = os.environ.get("NNTTS_PURE_NUMPY", "").strip().lower()
_PURE_NUMPY = _env in ("1", "true", "yes", "on")

if not _PURE_NUMPY:
    try:
        from numba import njit

        USING_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USING_NUMBA = False
else:
    USING_NUMBA = False


# ---------------------------------------------------------------------------
# Dynamic-programming alignment fill
# ---------------------------------------------------------------------------

# Move codes stored in the backtrace matrix.
MOVE_SUB = 0
MOVE_DEL = 1  # consume a-symbol against a gap
MOVE_INS = 2  # consume b-symbol against a gap


def dp_fill_py(sub, del_cost, ins_cost):
    """Fill the (n+1, m+1) cost matrix for global alignment.

    sub[i, j] is the cost of pairing a[i] with b[j]. Returns the cost
    matrix and a move matrix encoding the tie-broken backtrace choice
    (substitution preferred over deletion over insertion).
    """
    n, m = sub.shape
    dist = np.zeros((n + 1, m + 1))
    moves = np.zeros((n + 1, m + 1), dtype=np.uint8)
    for i in range(1, n + 1):
        dist[i, 0] = dist[i - 1, 0] + del_cost
        moves[i, 0] = MOVE_DEL
    for j in range(1, m + 1):
        dist[0, j] = dist[0, j - 1] + ins_cost
        moves[0, j] = MOVE_INS
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            c_sub = dist[i - 1, j - 1] + sub[i - 1, j - 1]
            c_del = dist[i - 1, j] + del_cost
            c_ins = dist[i, j - 1] + ins_cost
            best = c_sub
            move = MOVE_SUB
            if c_del < best:
                best = c_del
                move = MOVE_DEL
            if c_ins < best:
                best = c_ins
                move = MOVE_INS
            dist[i, j] = best
            moves[i, j] = move
    return dist, moves


# ---------------------------------------------------------------------------
# Pulse-train excitation
# ---------------------------------------------------------------------------


def pulse_train_py(f0_per_sample, amp_per_sample, sample_rate, phase0):
    """Place one pulse per pitch period via a running phase accumulator.

    A pulse of amplitude amp_per_sample[n] lands on every sample where the
    accumulated phase crosses an integer. Unvoiced stretches (f0 = 0)
    advance no phase. Returns (pulse signal, final phase in [0, 1)).
    """
    phase = phase0 + np.cumsum(f0_per_sample / sample_rate)
    fired = np.floor(phase) > np.floor(np.concatenate(([phase0], phase[:-1])))
    out = np.where(fired, amp_per_sample, 0.0)
    return out, float(phase[-1] % 1.0) if len(phase) else float(phase0)


def _pulse_train_loop(f0_per_sample, amp_per_sample, sample_rate, phase0):
    # Accumulates like np.cumsum(f0/sr) + phase0 so both paths agree bitwise.
    n = f0_per_sample.shape[0]
    out = np.zeros(n)
    acc = 0.0
    prev_floor = np.floor(phase0)
    for i in range(n):
        acc += f0_per_sample[i] / sample_rate
        fl = np.floor(phase0 + acc)
        if fl > prev_floor:
            out[i] = amp_per_sample[i]
        prev_floor = fl
    return out, (phase0 + acc) % 1.0


# ---------------------------------------------------------------------------
# Streaming FIR filter
# ---------------------------------------------------------------------------


def fir_stream_py(x, taps, hist):
    """Convolve x with taps, primed with hist (the last len(taps)-1 inputs)."""
    xh = np.concatenate((hist, x))
    return np.convolve(xh, taps, mode="full")[len(hist) : len(hist) + len(x)]


def _fir_stream_loop(x, taps, hist):
    n = x.shape[0]
    lh = hist.shape[0]
    nt = taps.shape[0]
    xh = np.empty(lh + n)
    xh[:lh] = hist
    xh[lh:] = x
    out = np.zeros(n)
    for i in range(n):
        acc = 0.0
        base = lh + i
        for k in range(nt):
            j = base - k
            if j >= 0:
                acc += taps[k] * xh[j]
        out[i] = acc
    return out


# ---------------------------------------------------------------------------
# Time-varying all-pole filter
# ---------------------------------------------------------------------------


def allpole_stream_py(exc, coefs, seg_len, state):
    """Run y[n] = exc[n] - sum_k a_k y[n-k] with per-segment coefficients.

    coefs has one row of a_1..a_p per seg_len-sample segment. state holds
    the p most recent outputs, newest last; it is not modified.
    """
    p = coefs.shape[1]
    n = exc.shape[0]
    buf = np.empty(p + n)
    buf[:p] = state
    for i in range(n):
        a = coefs[i // seg_len]
        acc = exc[i]
        for k in range(p):
            acc -= a[k] * buf[p + i - 1 - k]
        buf[p + i] = acc
    return buf[p:]


if USING_NUMBA:
    dp_fill = njit(cache=True)(dp_fill_py)
    pulse_train = njit(cache=True)(_pulse_train_loop)
    fir_stream = njit(cache=True)(_fir_stream_loop)
    allpole_stream = njit(cache=True)(allpole_stream_py)
else:
    dp_fill = dp_fill_py
    pulse_train = pulse_train_py
    fir_stream = fir_stream_py
    allpole_stream = allpole_stream_py
