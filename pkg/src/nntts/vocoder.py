"""Mixed-excitation LSF vocoder: analysis into 13-parameter frames and
synthesis of audio from them.

Frames carry f0 (Hz), power (dB re full scale), the voiced/unvoiced
boundary frequency (Hz), and ten line spectral frequencies (rad). Analysis
runs order-10 autocorrelation LPC with a 25 ms Hamming window every 10 ms;
synthesis excites an all-pole filter with a pulse train lowpassed at the
boundary frequency plus noise highpassed above it, interpolating
parameters at 2.5 ms subframes and scaling each frame so its output power
matches the power parameter.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ._kernels import allpole_stream, fir_stream, pulse_train
from .errors import DataError

SILENCE_FLOOR_DB = -100.0


@dataclass(frozen=True)
class VocoderConfig:
    sample_rate: int = 16000
    lpc_order: int = 10
    window_ms: float = 25.0
    hop_ms: float = 10.0
    subframes: int = 4
    f0_min: float = 50.0
    f0_max: float = 400.0
    voicing_threshold: float = 0.5
    n_bands: int = 4
    fir_taps: int = 65
    fir_regen_hz: float = 50.0
    lag_window_hz: float = 60.0

    @property
    def hop(self):
        return int(round(self.sample_rate * self.hop_ms / 1000.0))

    @property
    def window(self):
        return int(round(self.sample_rate * self.window_ms / 1000.0))

    @property
    def nyquist(self):
        return self.sample_rate / 2.0

    @property
    def pitch_window(self):
        # Long enough to hold two periods at f0_min plus slack.
        return int(2.5 * self.sample_rate / self.f0_min)


DEFAULT_CONFIG = VocoderConfig()


@dataclass
class FrameParams:
    f0: float
    power_db: float
    boundary_hz: float
    lsf: np.ndarray

    def to_vector(self):
        return np.concatenate(([self.f0, self.power_db, self.boundary_hz], self.lsf))

    @classmethod
    def from_vector(cls, v):
        v = np.asarray(v, dtype=float)
        return cls(float(v[0]), float(v[1]), float(v[2]), v[3:].copy())


def validate_frame(fp, cfg=DEFAULT_CONFIG):
    if not np.all(np.isfinite(fp.to_vector())):
        raise DataError("frame contains non-finite parameters")
    if fp.f0 < 0:
        raise DataError(f"negative f0 {fp.f0}")
    if fp.f0 == 0 and fp.boundary_hz != 0:
        raise DataError("unvoiced frame (f0=0) must have boundary_freq 0")
    if not 0 <= fp.boundary_hz <= cfg.nyquist:
        raise DataError(f"boundary frequency {fp.boundary_hz} outside [0, Nyquist]")
    if len(fp.lsf) != cfg.lpc_order:
        raise DataError(f"expected {cfg.lpc_order} LSFs, got {len(fp.lsf)}")
    if fp.lsf[0] <= 0 or fp.lsf[-1] >= np.pi or np.any(np.diff(fp.lsf) <= 0):
        raise DataError("LSFs must be strictly increasing inside (0, pi)")


@dataclass
class AudioBuffer:
    samples: np.ndarray
    sample_rate: int = 16000

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self):
        return len(self.samples) / self.sample_rate


# ---------------------------------------------------------------------------
# LPC <-> LSF
# ---------------------------------------------------------------------------


def levinson_durbin(r, order):
    """Autocorrelation-to-LPC recursion.

    Returns (a, err) with A(z) = 1 + sum a_k z^-k and the residual energy.
    Degenerate input (r[0] <= 0) yields the flat filter.
    """
    a = np.zeros(order)
    err = float(r[0])
    if err <= 0.0:
        return a, 0.0
    for i in range(1, order + 1):
        acc = r[i]
        for j in range(1, i):
            acc += a[j - 1] * r[i - j]
        k = -acc / err
        new_a = a.copy()
        for j in range(1, i):
            new_a[j - 1] = a[j - 1] + k * a[i - j - 1]
        new_a[i - 1] = k
        a = new_a
        err *= 1.0 - k * k
        if err <= 0.0:
            err = 0.0
            break
    return a, err


def _sum_diff_polys(a):
    """Deflated symmetric sum/difference polynomials of A(z).

    P(z) = A(z) + z^-(p+1) A(1/z) divided by (1 + z^-1), and
    Q(z) = A(z) - z^-(p+1) A(1/z) divided by (1 - z^-1), for even order p.
    Both come out palindromic of degree p.
    """
    p = len(a)
    c = np.concatenate(([1.0], a, [0.0]))
    psum = c + c[::-1]
    qdiff = c - c[::-1]
    pd = np.empty(p + 1)
    acc = 0.0
    for i in range(p + 1):
        acc = psum[i] - acc
        pd[i] = acc
    qd = np.empty(p + 1)
    acc = 0.0
    for i in range(p + 1):
        acc = qdiff[i] + acc
        qd[i] = acc
    return pd, qd


def _palindrome_eval(c, omega):
    """Evaluate e^{jm w} * C(e^{-jw}) for palindromic c of even degree 2m."""
    m = (len(c) - 1) // 2
    acc = np.full_like(np.asarray(omega, dtype=float), c[m])
    for k in range(1, m + 1):
        acc = acc + 2.0 * c[m - k] * np.cos(k * np.asarray(omega, dtype=float))
    return acc


def _bisect_roots(crows, lo, hi, flo, iters=48):
    """Refine bracketed roots, one palindromic coefficient row per root."""
    m = (crows.shape[1] - 1) // 2
    ks = np.arange(1, m + 1)
    base = crows[:, m]
    terms = 2.0 * crows[:, m - 1 :: -1][:, :m]
    lo = lo.copy()
    hi = hi.copy()
    flo = flo.copy()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = base + (terms * np.cos(np.outer(mid, ks))).sum(axis=1)
        same = (flo < 0) == (fm < 0)
        lo = np.where(same, mid, lo)
        flo = np.where(same, fm, flo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


def _grid_brackets(c, grid, vals, expected):
    exact = np.where((vals == 0.0) & (grid > 0.0) & (grid < np.pi))[0]
    sign_change = np.where((vals[:-1] < 0) != (vals[1:] < 0))[0]
    sign_change = np.setdiff1d(sign_change, exact, assume_unique=False)
    if len(exact) + len(sign_change) != expected:
        return None
    return exact, sign_change


def _eig_roots(c, expected, tol=1e-3):
    rts = np.roots(c)
    off = np.abs(np.abs(rts) - 1.0)
    if np.any(off > tol):
        raise DataError(
            "unstable LPC filter: root magnitude error "
            f"{off.max():.3g} exceeds {tol}"
        )
    angles = sorted(float(np.angle(r)) for r in rts if np.angle(r) > 0)
    if len(angles) != expected:
        raise DataError("unstable LPC filter: line spectral roots not resolvable")
    return angles


def lpc_to_lsf(a, n_grid=512):
    """Line spectral frequencies of a minimum-phase A(z) = 1 + sum a_k z^-k.

    Roots are located by sign changes of the symmetric sum/difference
    polynomials on an n_grid cosine-domain grid and refined by bisection;
    clustered roots the grid cannot separate fall back to an eigenvalue
    solve, and off-circle roots raise.
    """
    a = np.asarray(a, dtype=float)
    p = len(a)
    if p % 2 != 0:
        raise DataError("LPC order must be even")
    m = p // 2
    pd, qd = _sum_diff_polys(a)
    grid = np.linspace(0.0, np.pi, n_grid + 1)
    pb = _grid_brackets(pd, grid, _palindrome_eval(pd, grid), m)
    qb = _grid_brackets(qd, grid, _palindrome_eval(qd, grid), m)
    if pb is not None and qb is not None:
        # Refine both polynomials' brackets in a single vectorized pass.
        pex, psc = pb
        qex, qsc = qb
        crows = np.vstack(
            [np.tile(pd, (len(psc), 1)), np.tile(qd, (len(qsc), 1))]
        )
        vals = np.concatenate(
            [_palindrome_eval(pd, grid[psc]), _palindrome_eval(qd, grid[qsc])]
        )
        brackets = np.concatenate([psc, qsc])
        refined = _bisect_roots(crows, grid[brackets], grid[brackets + 1], vals)
        proots = sorted(
            np.concatenate((grid[pex], refined[: len(psc)])).tolist()
        )
        qroots = sorted(
            np.concatenate((grid[qex], refined[len(psc) :])).tolist()
        )
    else:
        proots = _eig_roots(pd, m)
        qroots = _eig_roots(qd, m)
    lsf = np.empty(p)
    lsf[0::2] = proots
    lsf[1::2] = qroots
    if lsf[0] <= 0 or lsf[-1] >= np.pi or np.any(np.diff(lsf) <= 0):
        raise DataError("unstable LPC filter: LSFs do not interleave")
    return lsf


def lsf_to_lpc(lsf):
    """Rebuild A(z) from interleaved line spectral frequencies."""
    lsf = np.asarray(lsf, dtype=float)
    if lsf[0] <= 0 or lsf[-1] >= np.pi or np.any(np.diff(lsf) <= 0):
        raise DataError("LSFs must be strictly increasing inside (0, pi)")
    if len(lsf) % 2 != 0:
        raise DataError("LSF count must be even")

    def poly_from(roots):
        poly = np.array([1.0])
        for w in roots:
            poly = np.convolve(poly, [1.0, -2.0 * np.cos(w), 1.0])
        return poly

    pd = np.convolve(poly_from(lsf[0::2]), [1.0, 1.0])
    qd = np.convolve(poly_from(lsf[1::2]), [1.0, -1.0])
    full = 0.5 * (pd + qd)
    return full[1 : len(lsf) + 1]


def formant_lpc(formants_hz, bandwidths_hz, cfg=DEFAULT_CONFIG, order=None):
    """All-pole coefficients with resonances at the given formants."""
    order = order if order is not None else cfg.lpc_order
    poly = np.array([1.0])
    for f, bw in zip(formants_hz, bandwidths_hz):
        r = np.exp(-np.pi * bw / cfg.sample_rate)
        theta = 2.0 * np.pi * f / cfg.sample_rate
        poly = np.convolve(poly, [1.0, -2.0 * r * np.cos(theta), r * r])
    if len(poly) - 1 > order:
        raise DataError("too many formants for the LPC order")
    a = np.zeros(order)
    a[: len(poly) - 1] = poly[1:]
    return a


# ---------------------------------------------------------------------------
# Analysis
# ---------------------------------------------------------------------------


def _extract(samples, start, length):
    seg = np.zeros(length)
    lo = max(start, 0)
    hi = min(start + length, len(samples))
    if hi > lo:
        seg[lo - start : hi - start] = samples[lo:hi]
    return seg


def _frame_lpc(xw, cfg):
    order = cfg.lpc_order
    r = np.empty(order + 1)
    for k in range(order + 1):
        r[k] = np.dot(xw[: len(xw) - k], xw[k:])
    # Gaussian lag window: slight bandwidth expansion keeps pole pairs off
    # the unit circle so the LSF grid search stays resolvable.
    lags = np.arange(order + 1)
    r *= np.exp(-0.5 * (2.0 * np.pi * cfg.lag_window_hz * lags / cfg.sample_rate) ** 2)
    r[0] *= 1.0 + 1e-9
    return levinson_durbin(r, order)


def lpc_frames(audio, cfg=DEFAULT_CONFIG):
    """Per-frame (a, residual_energy) pairs; shares analyze's framing."""
    samples = np.asarray(audio.samples, dtype=float)
    if len(samples) < cfg.window:
        raise DataError(
            f"audio length {len(samples)} shorter than one analysis window "
            f"({cfg.window} samples)"
        )
    win = np.hamming(cfg.window)
    out = []
    for i in range(len(samples) // cfg.hop):
        center = i * cfg.hop + cfg.hop // 2
        seg = _extract(samples, center - cfg.window // 2, cfg.window)
        out.append(_frame_lpc(seg * win, cfg))
    return out


def _band_acf_ratio(psd, nfft, band_bins, lag):
    """Normalized autocorrelation of one spectral band at an integer lag."""
    if len(band_bins) == 0:
        return 0.0
    p = psd[band_bins]
    r0 = float(np.sum(p))
    if r0 <= 0.0:
        return 0.0
    rl = float(np.sum(p * np.cos(2.0 * np.pi * band_bins * lag / nfft)))
    return rl / r0


def analyze(audio, cfg=DEFAULT_CONFIG, silence_floor_db=SILENCE_FLOOR_DB):
    """Convert audio into the 13-parameter frame sequence.

    Power is the windowed mean square compensated for the window's power
    gain, in dB re full scale, floored at the silence floor. Voicing uses
    the normalized autocorrelation peak in [f0_min, f0_max]; the boundary
    frequency is the top edge of the highest of four equal sub-bands whose
    normalized autocorrelation at the pitch lag exceeds the voicing
    threshold.
    """
    samples = np.asarray(audio.samples, dtype=float)
    if audio.sample_rate != cfg.sample_rate:
        raise DataError(
            f"audio sample rate {audio.sample_rate} != configured {cfg.sample_rate}"
        )
    if len(samples) < cfg.window:
        raise DataError(
            f"audio length {len(samples)} shorter than one analysis window "
            f"({cfg.window} samples)"
        )
    if not np.all(np.isfinite(samples)):
        raise DataError("audio contains non-finite samples")

    sr = cfg.sample_rate
    win = np.hamming(cfg.window)
    wpg = float(np.mean(win**2))
    pwin = cfg.pitch_window
    lag_min = int(sr / cfg.f0_max)
    lag_max = int(np.ceil(sr / cfg.f0_min))
    nfft = 1 << int(np.ceil(np.log2(pwin + lag_max + 1)))
    freqs = np.fft.rfftfreq(nfft, 1.0 / sr)
    band_edges = np.linspace(0.0, cfg.nyquist, cfg.n_bands + 1)
    band_bins = [
        np.where((freqs > band_edges[b]) & (freqs <= band_edges[b + 1]))[0]
        for b in range(cfg.n_bands)
    ]

    frames = []
    floor_ms = 10.0 ** (silence_floor_db / 10.0)
    for i in range(len(samples) // cfg.hop):
        center = i * cfg.hop + cfg.hop // 2
        seg = _extract(samples, center - cfg.window // 2, cfg.window)
        xw = seg * win
        ms = float(np.mean(xw**2)) / wpg
        if ms <= floor_ms:
            power = silence_floor_db
            a = np.zeros(cfg.lpc_order)
            frames.append(FrameParams(0.0, power, 0.0, lpc_to_lsf(a)))
            continue
        power = 10.0 * np.log10(ms)
        a, _ = _frame_lpc(xw, cfg)
        lsf = lpc_to_lsf(a)

        pseg = _extract(samples, center - pwin // 2, pwin)
        pseg = pseg - pseg.mean()
        spec = np.fft.rfft(pseg, nfft)
        psd = spec.real**2 + spec.imag**2
        acf = np.fft.irfft(psd, nfft)
        f0 = 0.0
        boundary = 0.0
        if acf[0] > 0:
            nacf = acf[: lag_max + 2] / acf[0]
            search = nacf[lag_min : lag_max + 1]
            peak = int(np.argmax(search)) + lag_min
            if nacf[peak] > cfg.voicing_threshold:
                # Parabolic interpolation for sub-sample lag precision.
                y0, y1, y2 = nacf[peak - 1], nacf[peak], nacf[peak + 1]
                denom = y0 - 2.0 * y1 + y2
                shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
                lag = peak + float(np.clip(shift, -1.0, 1.0))
                f0 = sr / lag
                top = -1
                for b in range(cfg.n_bands):
                    if _band_acf_ratio(psd, nfft, band_bins[b], peak) > cfg.voicing_threshold:
                        top = max(top, b)
                boundary = float(band_edges[top + 1]) if top >= 0 else 0.0
                if boundary == 0.0:
                    f0 = 0.0
        frames.append(FrameParams(f0, power, boundary, lsf))
    return frames


# ---------------------------------------------------------------------------
# Synthesis
# ---------------------------------------------------------------------------


def _design_band_filters(fc, cfg):
    """Complementary 65-tap linear-phase lowpass/highpass pair at fc."""
    n = cfg.fir_taps
    mid = n // 2
    delta = np.zeros(n)
    delta[mid] = 1.0
    if fc <= 0.0:
        return np.zeros(n), delta
    if fc >= cfg.nyquist:
        return delta, np.zeros(n)
    x = np.arange(n) - mid
    lp = 2.0 * fc / cfg.sample_rate * np.sinc(2.0 * fc / cfg.sample_rate * x)
    lp *= np.hamming(n)
    lp /= lp.sum()
    return lp, delta - lp


def _soft_clip(x, knee=0.95):
    out = x.copy()
    over = np.abs(x) > knee
    out[over] = np.sign(x[over]) * (
        knee + (1.0 - knee) * np.tanh((np.abs(x[over]) - knee) / (1.0 - knee))
    )
    return out


def synthesize(frames, cfg=DEFAULT_CONFIG, seed=0):
    """Render a frame sequence to audio.

    Per frame: mixed excitation (pulse train lowpassed at the boundary
    frequency + white noise highpassed above it) drives the all-pole filter
    rebuilt from the LSFs, with f0/power/LSF linearly interpolated at
    subframe resolution. Each frame is then rescaled exactly to the power
    parameter by splitting the output into zero-input and forced responses,
    which keeps the filter recursion consistent across frames. Output is
    soft-clipped above 0.95 so no sample reaches +-1.
    """
    frames = list(frames)
    for fp in frames:
        validate_frame(fp, cfg)
    hop = cfg.hop
    nsub = cfg.subframes
    sub_len = hop // nsub
    if sub_len * nsub != hop:
        raise DataError("hop must be divisible by the subframe count")
    p = cfg.lpc_order
    sr = cfg.sample_rate

    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(len(frames) * hop)
    out = np.zeros(len(frames) * hop)
    state = np.zeros(p)
    phase = 0.0
    vhist = np.zeros(cfg.fir_taps - 1)
    nhist = np.zeros(cfg.fir_taps - 1)
    taps_cache = {}
    zeros_exc = np.zeros(hop)

    for i, cur in enumerate(frames):
        prev = frames[i - 1] if i > 0 else cur
        coefs = np.empty((nsub, p))
        f0_sub = np.empty(nsub)
        gain_sub = np.empty(nsub)
        for s in range(nsub):
            w = (s + 1) / nsub
            coefs[s] = lsf_to_lpc((1.0 - w) * prev.lsf + w * cur.lsf)
            if prev.f0 > 0 and cur.f0 > 0:
                f0_sub[s] = (1.0 - w) * prev.f0 + w * cur.f0
            else:
                f0_sub[s] = cur.f0
            pw = (1.0 - w) * prev.power_db + w * cur.power_db
            gain_sub[s] = np.sqrt(10.0 ** (pw / 10.0))

        key = int(round(cur.boundary_hz / cfg.fir_regen_hz))
        if key not in taps_cache:
            taps_cache[key] = _design_band_filters(key * cfg.fir_regen_hz, cfg)
        lp_taps, hp_taps = taps_cache[key]

        f0_samp = np.repeat(f0_sub, sub_len)
        g_samp = np.repeat(gain_sub, sub_len)
        amp_samp = g_samp * np.sqrt(sr / np.maximum(f0_samp, 1.0))
        pulses, phase = pulse_train(f0_samp, amp_samp, float(sr), phase)
        nseg = noise[i * hop : (i + 1) * hop] * g_samp

        voiced = fir_stream(pulses, lp_taps, vhist)
        unvoiced = fir_stream(nseg, hp_taps, nhist)
        vhist = np.concatenate((vhist, pulses))[-(cfg.fir_taps - 1) :]
        nhist = np.concatenate((nhist, nseg))[-(cfg.fir_taps - 1) :]
        exc = voiced + unvoiced

        zir = allpole_stream(zeros_exc, coefs, sub_len, state)
        full = allpole_stream(exc, coefs, sub_len, state)
        forced = full - zir

        target_ms = 10.0 ** (cur.power_db / 10.0)
        if i == 0:
            # Cold start: match the tail only, so the state handed to the
            # next frame sits at steady level instead of a hot transient.
            tail = forced[hop // 2 :]
            qa = float(np.dot(tail, tail))
            g = np.sqrt(target_ms * len(tail) / qa) if qa > 0.0 else 0.0
        else:
            target_energy = target_ms * hop
            qa = float(np.dot(forced, forced))
            qb = float(np.dot(zir, forced))
            qc = float(np.dot(zir, zir)) - target_energy
            if qa > 0.0:
                disc = qb * qb - qa * qc
                g = (-qb + np.sqrt(disc)) / qa if disc >= 0.0 else max(0.0, -qb / qa)
            else:
                g = 0.0
        y = zir + g * forced
        state = y[-p:].copy()
        out[i * hop : (i + 1) * hop] = y

    return AudioBuffer(samples=_soft_clip(out), sample_rate=sr)


# ---------------------------------------------------------------------------
# Quality meters
# ---------------------------------------------------------------------------


def lpc_envelope_db(a, residual_energy, freqs_hz, cfg=DEFAULT_CONFIG):
    """LPC model spectrum sqrt(E)/|A| in dB at the given frequencies."""
    w = 2.0 * np.pi * np.asarray(freqs_hz, dtype=float) / cfg.sample_rate
    ks = np.arange(1, len(a) + 1)
    aw = 1.0 + (a[None, :] * np.exp(-1j * np.outer(w, ks))).sum(axis=1)
    gain = np.sqrt(max(residual_energy, 1e-20))
    return 20.0 * np.log10(gain / np.maximum(np.abs(aw), 1e-12))


def log_spectral_distortion(ref, test, cfg=DEFAULT_CONFIG, fmax_hz=4000.0, n_freqs=128):
    """Mean per-frame RMS difference of LPC envelopes up to fmax, in dB."""
    freqs = np.linspace(50.0, fmax_hz, n_freqs)
    ref_frames = lpc_frames(ref, cfg)
    test_frames = lpc_frames(test, cfg)
    n = min(len(ref_frames), len(test_frames))
    if n == 0:
        raise DataError("no frames to compare")
    dists = []
    for (ar, er), (at, et) in zip(ref_frames[:n], test_frames[:n]):
        env_r = lpc_envelope_db(ar, er, freqs, cfg)
        env_t = lpc_envelope_db(at, et, freqs, cfg)
        dists.append(float(np.sqrt(np.mean((env_r - env_t) ** 2))))
    return float(np.mean(dists))


# ---------------------------------------------------------------------------
# WAV I/O (RIFF PCM16 mono)
# ---------------------------------------------------------------------------


def read_wav(path):
    with open(path, "rb") as f:
        header = f.read(12)
        if len(header) < 12 or header[:4] != b"RIFF" or header[8:12] != b"WAVE":
            raise DataError(f"{path}: not a RIFF/WAVE file ('RIFF' chunk)")
        fmt = None
        data = None
        while True:
            chunk_header = f.read(8)
            if len(chunk_header) < 8:
                break
            cid, size = struct.unpack("<4sI", chunk_header)
            payload = f.read(size)
            if len(payload) < size:
                raise DataError(f"{path}: truncated {cid.decode('ascii', 'replace')} chunk")
            if size % 2:
                f.read(1)
            if cid == b"fmt ":
                fmt = payload
            elif cid == b"data":
                data = payload
        if fmt is None:
            raise DataError(f"{path}: missing 'fmt ' chunk")
        if data is None:
            raise DataError(f"{path}: missing 'data' chunk")
        if len(fmt) < 16:
            raise DataError(f"{path}: short 'fmt ' chunk")
        audio_format, channels, rate, _, _, bits = struct.unpack("<HHIIHH", fmt[:16])
        if audio_format != 1:
            raise DataError(
                f"{path}: unsupported format {audio_format} in 'fmt ' chunk (need PCM)"
            )
        if channels != 1:
            raise DataError(
                f"{path}: unsupported channel count {channels} in 'fmt ' chunk (need mono)"
            )
        if bits != 16:
            raise DataError(
                f"{path}: unsupported bit depth {bits} in 'fmt ' chunk (need 16)"
            )
        ints = np.frombuffer(data, dtype="<i2")
        return AudioBuffer(samples=ints.astype(float) / 32767.0, sample_rate=rate)


def write_wav(audio, path):
    x = np.clip(np.asarray(audio.samples, dtype=float), -1.0, 1.0)
    ints = np.round(x * 32767.0).astype("<i2")
    data = ints.tobytes()
    rate = audio.sample_rate
    with open(path, "wb") as f:
        f.write(b"RIFF")
        f.write(struct.pack("<I", 36 + len(data)))
        f.write(b"WAVE")
        f.write(b"fmt ")
        f.write(struct.pack("<IHHIIHH", 16, 1, 1, rate, rate * 2, 2, 16))
        f.write(b"data")
        f.write(struct.pack("<I", len(data)))
        f.write(data)


# ---------------------------------------------------------------------------
# Frame dump (one frame per line, 13 fields: f0, power, boundary, 10 LSFs)
# ---------------------------------------------------------------------------


def dump_frames(frames, path):
    with open(path, "w", encoding="utf-8") as f:
        for fp in frames:
            f.write(" ".join(f"{v:.10g}" for v in fp.to_vector()) + "\n")


def load_frame_dump(path, cfg=DEFAULT_CONFIG):
    frames = []
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            if len(fields) != 3 + cfg.lpc_order:
                raise DataError(
                    f"{path}:{lineno}: expected {3 + cfg.lpc_order} fields, "
                    f"got {len(fields)}"
                )
            try:
                values = [float(v) for v in fields]
            except ValueError as e:
                raise DataError(f"{path}:{lineno}: {e}") from e
            frames.append(FrameParams.from_vector(values))
    return frames
