"""Phonetic network stage: maps the timed linguistic representation to
10 ms vocoder frames with recurrent output feedback.

Inputs per frame: the current phone and +-2 context (one-hot plus
features), fractional position inside the phone, log phone duration,
syllable stress, boundary distances, and the previous FEEDBACK_K output
frames (teacher-forced from analysis targets in training, self-fed in
generation; the pad for missing history is the zero vector). Frame
parameters are normalized to roughly [0, 1] per component for training and
de-normalized with range clamping and LSF repair on the way out.
"""

from __future__ import annotations

import struct

import numpy as np

from . import nn
from .errors import DataError, ModelError
from .lingnets import phone_pad_vector, phone_slot_dim, phone_slot_vector
from .phonology import boundary_distances, flatten
from .vocoder import DEFAULT_CONFIG, FrameParams, analyze

FEEDBACK_K = 4
ACOUSTIC_RADIUS = 2
#: Generated f0 below this snaps to unvoiced.
F0_FLOOR_HZ = 50.0
F0_SCALE_HZ = 400.0
#: Minimum separation enforced between repaired LSFs, in radians.
LSF_MIN_GAP = 1e-3
_LOG_DUR_SCALE = 7.0  # log(1096 ms); keeps log durations near [0, 1]

_DATASET_MAGIC = b"NNFD"
_DATASET_VERSION = 1


def frame_param_dim(cfg=DEFAULT_CONFIG):
    return 3 + cfg.lpc_order


def normalize_frame(fp, cfg=DEFAULT_CONFIG):
    return np.concatenate(
        (
            [
                fp.f0 / F0_SCALE_HZ,
                (fp.power_db + 100.0) / 100.0,
                fp.boundary_hz / cfg.nyquist,
            ],
            fp.lsf / np.pi,
        )
    )


def repair_lsf(lsf, gap=LSF_MIN_GAP):
    """Sort and push apart so the interleaving invariant always holds."""
    out = np.sort(np.asarray(lsf, dtype=float))
    out = np.clip(out, gap, np.pi - gap)
    for i in range(1, len(out)):
        if out[i] < out[i - 1] + gap:
            out[i] = out[i - 1] + gap
    if out[-1] > np.pi - gap:
        out[-1] = np.pi - gap
        for i in range(len(out) - 2, -1, -1):
            if out[i] > out[i + 1] - gap:
                out[i] = out[i + 1] - gap
    return out


def denormalize_frame(vec, cfg=DEFAULT_CONFIG):
    """Network output -> valid FrameParams (clamped, LSFs repaired)."""
    vec = np.asarray(vec, dtype=float)
    f0 = float(np.clip(vec[0] * F0_SCALE_HZ, 0.0, 500.0))
    if f0 < F0_FLOOR_HZ:
        f0 = 0.0
    power = float(np.clip(vec[1] * 100.0 - 100.0, -100.0, 0.0))
    boundary = float(np.clip(vec[2] * cfg.nyquist, 0.0, cfg.nyquist))
    if f0 == 0.0:
        boundary = 0.0
    lsf = repair_lsf(vec[3:] * np.pi)
    return FrameParams(f0=f0, power_db=power, boundary_hz=boundary, lsf=lsf)


def frame_allocation(durations_ms, cfg=DEFAULT_CONFIG):
    """Cumulative-rounded frames per phone; total is round(sum/hop) exactly."""
    durations_ms = np.asarray(durations_ms, dtype=float)
    bounds = np.concatenate(
        ([0], np.round(np.cumsum(durations_ms) / cfg.hop_ms).astype(int))
    )
    counts = np.diff(bounds)
    phone_of = np.repeat(np.arange(len(durations_ms)), counts)
    return phone_of, bounds


class FrameEncoder:
    """Precomputes the static (non-feedback) input rows for one utterance."""

    def __init__(self, rep, durations_ms, fs, cfg=DEFAULT_CONFIG):
        self.cfg = cfg
        self.fs = fs
        flat = flatten(rep)
        durations_ms = np.asarray(durations_ms, dtype=float)
        if len(durations_ms) != len(flat):
            raise DataError(
                f"{len(durations_ms)} durations for {len(flat)} phones"
            )
        self.flat = flat
        self.phone_of, self.bounds = frame_allocation(durations_ms, cfg)
        self.n_frames = int(self.bounds[-1])
        dists = boundary_distances(flat)
        pad = phone_pad_vector(fs)
        slots = [phone_slot_vector(sym, fs) for sym in flat.symbols]
        static = []
        for i in range(len(flat)):
            ctx = nn.assemble_window(slots, i, ACOUSTIC_RADIUS, pad)
            stress = np.zeros(3)
            stress[flat.syllables[flat.syl_of[i]].stress] = 1.0
            d = (
                np.minimum(
                    [
                        dists.next_word[i],
                        dists.next_phrase[i],
                        dists.next_clause[i],
                        dists.next_sentence[i],
                    ],
                    10.0,
                )
                / 10.0
            )
            logdur = np.log(max(durations_ms[i], 1.0)) / _LOG_DUR_SCALE
            static.append(np.concatenate((ctx, [logdur], stress, d)))
        self._static = static
        self._param_dim = frame_param_dim(cfg)

    @property
    def base_dim(self):
        return len(self._static[0]) + 1 if self._static else 0

    @property
    def input_dim(self):
        return self.base_dim + FEEDBACK_K * self._param_dim

    def row(self, frame_index, previous_outputs):
        """Input vector for one frame given the normalized history rows.

        previous_outputs holds the most recent frame last; missing history
        pads with zeros.
        """
        if not 0 <= frame_index < self.n_frames:
            raise DataError(
                f"frame index {frame_index} out of range (n={self.n_frames})"
            )
        pi = int(self.phone_of[frame_index])
        local = frame_index - self.bounds[pi]
        count = self.bounds[pi + 1] - self.bounds[pi]
        frac = (local + 0.5) / count
        fb = np.zeros(FEEDBACK_K * self._param_dim)
        for k in range(1, FEEDBACK_K + 1):
            if len(previous_outputs) >= k:
                fb[(k - 1) * self._param_dim : k * self._param_dim] = (
                    previous_outputs[-k]
                )
        return np.concatenate((self._static[pi], [frac], fb))


def acoustic_input_dim(fs, cfg=DEFAULT_CONFIG):
    # context slots + log duration + stress one-hot + 4 distances + position
    return (2 * ACOUSTIC_RADIUS + 1) * phone_slot_dim(fs) + 9 + FEEDBACK_K * (
        frame_param_dim(cfg)
    )


def encode_frame_input(rep, durations_ms, frame_index, previous_outputs, fs,
                       cfg=DEFAULT_CONFIG):
    """Deterministic per-frame input vector (one-shot convenience API)."""
    return FrameEncoder(rep, durations_ms, fs, cfg).row(frame_index, previous_outputs)


def build_frame_dataset(audio, rep, durations_ms, fs, cfg=DEFAULT_CONFIG):
    """(input, normalized target) pairs for one labeled utterance.

    Targets come from the vocoder analysis of the audio; inputs are
    teacher-forced with the analysis frames as feedback history.
    """
    enc = FrameEncoder(rep, durations_ms, fs, cfg)
    targets = analyze(audio, cfg)
    if enc.n_frames > len(targets):
        raise DataError(
            f"segmentation spans {enc.n_frames} frames but audio has "
            f"only {len(targets)}"
        )
    norm = [normalize_frame(fp, cfg) for fp in targets]
    xs = []
    for t in range(enc.n_frames):
        xs.append(enc.row(t, norm[:t]))
    return np.array(xs), np.array(norm[: enc.n_frames])


def generate_frames(rep, durations_ms, net, fs, cfg=DEFAULT_CONFIG):
    """Run the net frame by frame, feeding back its own previous outputs."""
    enc = FrameEncoder(rep, durations_ms, fs, cfg)
    if net.input_size != enc.input_dim:
        raise ModelError(
            f"net expects {net.input_size} inputs, encoder provides {enc.input_dim}"
        )
    frames = []
    history = []
    for t in range(enc.n_frames):
        y = nn.forward(net, enc.row(t, history))
        fp = denormalize_frame(y, cfg)
        frames.append(fp)
        history.append(normalize_frame(fp, cfg))
    return frames


# ---------------------------------------------------------------------------
# Binary frame-dataset cache: magic, version, counts, then per frame the
# input row and the 13 normalized target values, all little-endian f8.
# ---------------------------------------------------------------------------


def save_frame_dataset(xs, ts, path):
    xs = np.asarray(xs, dtype=float)
    ts = np.asarray(ts, dtype=float)
    if len(xs) != len(ts):
        raise DataError("input/target row counts differ")
    with open(path, "wb") as f:
        f.write(_DATASET_MAGIC)
        f.write(struct.pack("<IIII", _DATASET_VERSION, len(xs), xs.shape[1], ts.shape[1]))
        rows = np.hstack((xs, ts))
        f.write(np.ascontiguousarray(rows, dtype="<f8").tobytes())


def load_frame_dataset(path):
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != _DATASET_MAGIC:
            raise DataError(f"{path}: not a frame dataset (bad magic)")
        header = f.read(16)
        if len(header) < 16:
            raise DataError(f"{path}: truncated header")
        version, n, in_dim, t_dim = struct.unpack("<IIII", header)
        if version != _DATASET_VERSION:
            raise DataError(f"{path}: dataset version {version}, expected {_DATASET_VERSION}")
        buf = f.read(8 * n * (in_dim + t_dim))
        if len(buf) != 8 * n * (in_dim + t_dim):
            raise DataError(f"{path}: truncated frame data")
        if f.read(1):
            raise DataError(f"{path}: trailing bytes")
    rows = np.frombuffer(buf, dtype="<f8").reshape(n, in_dim + t_dim)
    return rows[:, :in_dim].copy(), rows[:, in_dim:].copy()
