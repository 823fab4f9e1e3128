#!/usr/bin/env python3
"""Benchmark the numba-compiled kernels against their pure-numpy fallbacks.

Runs each hot kernel in both flavours on synthesis-sized workloads, then
times a full vocoder synthesize() pass per path. Usage:

    python3 benchmarks/bench_kernels.py [--seconds 5]

Set NNTTS_PURE_NUMPY=1 to confirm the fallback path is what ships when
numba is unavailable (both columns will then match).
"""

import argparse
import time

import numpy as np

from nntts import _kernels as K
from nntts import vocoder as vc


def timeit(fn, *args, repeat=5):
    fn(*args)  # warm-up / JIT
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(seconds):
    sr = 16000
    n = sr * seconds
    rng = np.random.default_rng(0)

    sub = rng.uniform(0, 2, size=(40, 40))
    f0 = np.repeat(rng.uniform(80, 250, n // 40), 40)
    amp = np.ones(n)
    x = rng.standard_normal(n)
    taps = np.hamming(65)
    hist = np.zeros(64)
    coefs = np.tile(vc.formant_lpc([500, 1500], [90, 120]), (n // 40, 1))
    state = np.zeros(10)

    def per_frame(fir):
        # Synthesis calls the FIR once per 160-sample frame.
        def run(x, taps, hist):
            for i in range(0, len(x), 160):
                fir(x[i : i + 160], taps, hist)

        return run

    cases = [
        ("dp_fill 40x40", K.dp_fill, K.dp_fill_py, (sub, 0.9, 0.9)),
        (f"pulse_train {seconds}s", K.pulse_train, K.pulse_train_py,
         (f0, amp, float(sr), 0.0)),
        (f"fir_stream {seconds}s framed", per_frame(K.fir_stream),
         per_frame(K.fir_stream_py), (x, taps, hist)),
        (f"allpole_stream {seconds}s", K.allpole_stream, K.allpole_stream_py,
         (x, coefs, 40, state)),
    ]
    print(f"numba active: {K.USING_NUMBA}")
    print(f"{'kernel':<28} {'active path':>12} {'numpy path':>12} {'speedup':>9}")
    for name, active, fallback, args in cases:
        t_active = timeit(active, *args)
        t_numpy = timeit(fallback, *args)
        print(f"{name:<28} {t_active*1e3:>10.2f}ms {t_numpy*1e3:>10.2f}ms "
              f"{t_numpy/max(t_active, 1e-12):>8.1f}x")


def bench_synthesize(seconds):
    lsf = vc.lpc_to_lsf(vc.formant_lpc([600, 1400], [90, 120]))
    frames = [vc.FrameParams(120.0, -25.0, 6000.0, lsf) for _ in range(100 * seconds)]

    t_active = timeit(lambda: vc.synthesize(frames), repeat=3)

    saved = (vc.pulse_train, vc.fir_stream, vc.allpole_stream)
    vc.pulse_train = K.pulse_train_py
    vc.fir_stream = K.fir_stream_py
    vc.allpole_stream = K.allpole_stream_py
    try:
        t_numpy = timeit(lambda: vc.synthesize(frames), repeat=3)
    finally:
        vc.pulse_train, vc.fir_stream, vc.allpole_stream = saved

    print(f"\nsynthesize {seconds}s of audio:")
    print(f"  active path: {t_active*1e3:8.1f} ms  (RTF {t_active/seconds:.4f})")
    print(f"  numpy path:  {t_numpy*1e3:8.1f} ms  (RTF {t_numpy/seconds:.4f})")
    print(f"  speedup: {t_numpy/max(t_active, 1e-12):.1f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seconds", type=int, default=5,
                        help="audio-equivalent workload size")
    args = parser.parse_args()
    bench_kernels(args.seconds)
    bench_synthesize(args.seconds)


if __name__ == "__main__":
    main()
