"""Segment duration modeling: linguistic-context encoding plus log and
z-score target transforms around per-phone duration statistics.

The rule-condition bit vector distills the classic rule-based duration
factors (final lengthening, destressing, function-word shortening, and so
on) into eight binary inputs; bit order is fixed by RULE_CONDITIONS.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nn
from .errors import DataError
from .phonology import boundary_distances, flatten

DURATION_RADIUS = 2
MIN_DURATION_MS = 20.0

RULE_CONDITIONS = (
    "phrase_final_syllable",
    "clause_final_syllable",
    "unstressed_syllable",
    "function_word",
    "is_nucleus",
    "pre_pausal",
    "polysyllabic_word",
    "pitch_accented_syllable",
)

_OFFSET_CLIP = 3.0
_SYL_CLIP = 5.0


@dataclass
class DurationStats:
    means: dict
    stds: dict
    counts: dict
    global_mean: float
    global_std: float

    def mean(self, phone):
        return self.means.get(phone, self.global_mean)

    def std(self, phone):
        return self.stds.get(phone, self.global_std)


def phone_stats(corpus):
    """Per-phone mean/std (unbiased) with a global fallback.

    Phones with fewer than two tokens or constant durations take the global
    std so z-scoring never divides by zero.
    """
    durations = {}
    all_durs = []
    for phone, dur in corpus:
        durations.setdefault(phone, []).append(float(dur))
        all_durs.append(float(dur))
    if not all_durs:
        raise DataError("empty duration corpus")
    global_mean = float(np.mean(all_durs))
    global_std = float(np.std(all_durs, ddof=1)) if len(all_durs) > 1 else 1.0
    if global_std <= 0:
        global_std = 1.0
    means, stds, counts = {}, {}, {}
    for phone, durs in durations.items():
        means[phone] = float(np.mean(durs))
        counts[phone] = len(durs)
        std = float(np.std(durs, ddof=1)) if len(durs) > 1 else 0.0
        stds[phone] = std if std > 0 else global_std
    return DurationStats(
        means=means,
        stds=stds,
        counts=counts,
        global_mean=global_mean,
        global_std=global_std,
    )


def to_log(ms):
    if ms <= 0:
        raise DataError(f"duration must be positive, got {ms}")
    return float(np.log(ms))


def from_log(value):
    return max(float(np.exp(value)), MIN_DURATION_MS)


def to_zscore(ms, phone, stats):
    return (float(ms) - stats.mean(phone)) / stats.std(phone)


def from_zscore(z, phone, stats):
    return max(stats.mean(phone) + float(z) * stats.std(phone), MIN_DURATION_MS)


# ---------------------------------------------------------------------------
# Context encoding
# ---------------------------------------------------------------------------


def _syllable_flags(flat):
    """Per-syllable booleans for the rule conditions."""
    n_syl = len(flat.syllables)
    phrase_final = np.zeros(n_syl, dtype=bool)
    clause_final = np.zeros(n_syl, dtype=bool)
    word_final = np.zeros(n_syl, dtype=bool)
    last_of_phrase = {}
    for yi in range(n_syl):
        last_of_phrase[flat.syl_phrase_of[yi]] = yi
    for yi in last_of_phrase.values():
        phrase_final[yi] = True
    # Clause id per syllable via any phone of the syllable.
    syl_clause = np.zeros(n_syl, dtype=np.int64)
    for i in range(len(flat)):
        syl_clause[flat.syl_of[i]] = flat.clause_of[i]
    last_of_clause = {}
    for yi in range(n_syl):
        last_of_clause[syl_clause[yi]] = yi
    for yi in last_of_clause.values():
        clause_final[yi] = True
    last_of_word = {}
    for yi in range(n_syl):
        last_of_word[flat.syl_word_of[yi]] = yi
    for yi in last_of_word.values():
        word_final[yi] = True
    return phrase_final, clause_final, word_final


def _rule_bits(flat, i, flags):
    phrase_final, clause_final, word_final = flags
    yi = flat.syl_of[i]
    word = flat.words[flat.word_of[i]]
    syl = flat.syllables[yi]
    bits = np.zeros(len(RULE_CONDITIONS))
    bits[0] = phrase_final[yi]
    bits[1] = clause_final[yi]
    bits[2] = syl.stress == 0
    bits[3] = not word.is_content
    bits[4] = flat.nucleus_offset[i] == 0
    bits[5] = word.break_index >= 4 and word_final[yi]
    bits[6] = len(word.syllables) > 1
    bits[7] = syl.pitch_accent
    return bits


def rule_condition_vector(flat, phone_index):
    """The eight rule bits for one phone; order fixed by RULE_CONDITIONS."""
    return _rule_bits(flat, phone_index, _syllable_flags(flat))


def duration_slot_dim(fs):
    # one-hot + features + stress one-hot + content flag + 8 boundary
    # start/end flags + pad flag
    return len(fs.symbols) + len(fs.feature_names) + 3 + 1 + 8 + 1


def duration_input_dim(fs):
    return (2 * DURATION_RADIUS + 1) * duration_slot_dim(fs) + 3 + len(RULE_CONDITIONS)


def encode_duration_inputs(rep, fs, stats=None):
    """All per-phone duration-net input rows for one utterance."""
    flat = flatten(rep)
    dists = boundary_distances(flat)
    phrase_final, clause_final, word_final = _syllable_flags(flat)
    nf = len(fs.feature_names)
    nv = len(fs.symbols)
    slot_dim = duration_slot_dim(fs)

    slots = []
    for i, sym in enumerate(flat.symbols):
        v = np.zeros(slot_dim)
        v[fs.phone_index(sym)] = 1.0
        v[nv : nv + nf] = fs.feature_vector(sym)
        syl = flat.syllables[flat.syl_of[i]]
        v[nv + nf + syl.stress] = 1.0
        word = flat.words[flat.word_of[i]]
        v[nv + nf + 3] = 1.0 if word.is_content else 0.0
        base = nv + nf + 4
        starts = (dists.prev_word[i], dists.prev_phrase[i], dists.prev_clause[i],
                  dists.prev_sentence[i])
        ends = (dists.next_word[i], dists.next_phrase[i], dists.next_clause[i],
                dists.next_sentence[i])
        for k, d in enumerate(starts):
            v[base + k] = 1.0 if d == 0 else 0.0
        for k, d in enumerate(ends):
            v[base + 4 + k] = 1.0 if d == 0 else 0.0
        slots.append(v)
    pad = np.zeros(slot_dim)
    pad[-1] = 1.0

    # Per-syllable offsets to the nearest prosodic boundary and accent.
    n_syl = len(flat.syllables)
    boundary_syls = [
        yi for yi in range(n_syl) if phrase_final[yi] or clause_final[yi]
    ]
    accent_syls = [yi for yi in range(n_syl) if flat.syllables[yi].pitch_accent]

    rows = []
    for i in range(len(flat)):
        ctx = nn.assemble_window(slots, i, DURATION_RADIUS, pad)
        yi = flat.syl_of[i]
        off = np.clip(flat.nucleus_offset[i], -_OFFSET_CLIP, _OFFSET_CLIP) / _OFFSET_CLIP
        if boundary_syls:
            db = min(abs(yi - b) for b in boundary_syls)
        else:
            db = _SYL_CLIP
        if accent_syls:
            da = min(abs(yi - a) for a in accent_syls)
        else:
            da = _SYL_CLIP
        scalars = np.array(
            [off, min(db, _SYL_CLIP) / _SYL_CLIP, min(da, _SYL_CLIP) / _SYL_CLIP]
        )
        bits = _rule_bits(flat, i, (phrase_final, clause_final, word_final))
        rows.append(np.concatenate((ctx, scalars, bits)))
    return flat, np.array(rows)


def encode_duration_input(rep, phone_index, fs, stats=None):
    """Input vector for one phone of the rep."""
    flat, rows = encode_duration_inputs(rep, fs, stats)
    if not 0 <= phone_index < len(rows):
        raise DataError(f"phone index {phone_index} out of range (n={len(rows)})")
    return rows[phone_index]


def predict_durations(rep, net, stats, fs, mode="zscore"):
    """Per-phone durations in ms, inverse-transformed and floored."""
    if mode not in ("log", "zscore"):
        raise DataError(f"unknown duration mode {mode!r}")
    flat, rows = encode_duration_inputs(rep, fs)
    if not len(rows):
        return np.zeros(0)
    ys = nn.forward_batch(net, rows)[:, 0]
    out = np.empty(len(ys))
    for i, y in enumerate(ys):
        if mode == "log":
            out[i] = from_log(y)
        else:
            out[i] = from_zscore(y, flat.symbols[i], stats)
    return out
