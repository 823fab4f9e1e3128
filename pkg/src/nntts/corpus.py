"""Synthetic corpus generators and the JSONL utterance serialization.

Three generators stand in for a recorded speaker database: a postlexical
corpus driven by deterministic flapping/t,d-deletion style rules, a
duration corpus driven by multiplicative rule factors over the same
conditions the duration encoder exposes, and a synthetic-vowel audio
corpus with exact segmentations for the phonetic network. Everything is
seed-determined.

Corpus files are JSON-lines: one utterance per line with per-word
syllables, POS/content/prominence/break/accent marks, and the stage's
payload (postlexical phones or per-phone durations in ms).
"""

from __future__ import annotations

import json
import os

import numpy as np

from .errors import DataError
from .phonology import (
    Clause,
    LinguisticRep,
    Phrase,
    Sentence,
    Syllable,
    Word,
)
from .vocoder import (
    DEFAULT_CONFIG,
    FrameParams,
    formant_lpc,
    lpc_to_lsf,
    synthesize,
    write_wav,
)

_ONSETS = [
    "b", "ch", "d", "dh", "f", "g", "hh", "jh", "k", "l", "m", "n", "p",
    "r", "s", "sh", "t", "th", "v", "w", "y", "z", "zh",
]
_ONSET_W = [
    1, 0.5, 2, 0.6, 1, 1, 1, 0.5, 1.5, 1.5, 1.5, 1.5, 1,
    1.5, 2, 0.6, 3, 0.5, 0.7, 1, 0.7, 0.7, 0.25,
]
_VOWELS = [
    "aa", "ae", "ah", "ao", "aw", "ay", "eh", "er", "ey", "ih", "iy",
    "ow", "oy", "uh", "uw",
]
_VOWEL_W = [1, 1.5, 6.5, 0.9, 0.5, 1.2, 1.5, 0.8, 1, 1.5, 2.2, 1, 0.4, 0.6, 1.8]
_CODAS = [
    (), ("b",), ("ch",), ("d",), ("f",), ("g",), ("k",), ("l",), ("m",),
    ("n",), ("ng",), ("p",), ("r",), ("s",), ("sh",), ("t",), ("th",),
    ("v",), ("z",),
    ("n", "t"), ("s", "t"), ("n", "d"), ("l", "d"), ("k", "t"), ("l", "t"),
]
_CODA_W = [
    5, 0.3, 0.3, 1.4, 0.5, 0.3, 0.6, 1, 1, 1.4, 0.7, 0.4, 0.8,
    1, 0.3, 2.2, 0.3, 0.4, 1.4,
    0.9, 0.9, 0.7, 0.5, 0.5, 0.5,
]


def _norm(weights):
    w = np.asarray(weights, dtype=float)
    return w / w.sum()


_ONSET_P = _norm(_ONSET_W)
_VOWEL_P = _norm(_VOWEL_W)
_CODA_P = _norm(_CODA_W)

_CONTENT_POS = ["NN", "VB", "JJ", "RB"]
_FUNCTION_POS = ["DT", "IN", "PRP", "CC"]


def assemble_sentence(words):
    """Sentence structure from a word list, split into phrases/clauses by
    the words' break indices (>= 3 ends a phrase, 4 ends a clause)."""
    if not words:
        raise DataError("cannot assemble a sentence with no words")
    words[-1].break_index = 4
    clauses = []
    phrases = []
    current = []
    for w in words:
        current.append(w)
        if w.break_index >= 3:
            phrases.append(Phrase(words=current))
            current = []
        if w.break_index >= 4:
            clauses.append(Clause(phrases=phrases))
            phrases = []
    return Sentence(clauses=clauses)


def assemble_rep(words):
    """One-sentence rep, for corpus utterances."""
    return LinguisticRep(sentences=[assemble_sentence(words)])


def _random_word(rng, n_syllables=None):
    n_syl = int(n_syllables or rng.integers(1, 4))
    stressed = int(rng.integers(0, n_syl))
    content = rng.random() < 0.7
    syllables = []
    for k in range(n_syl):
        phones = []
        if rng.random() < 0.85:
            phones.append(str(rng.choice(_ONSETS, p=_ONSET_P)))
        nucleus = len(phones)
        phones.append(str(rng.choice(_VOWELS, p=_VOWEL_P)))
        phones.extend(_CODAS[int(rng.choice(len(_CODAS), p=_CODA_P))])
        stress = 1 if k == stressed else 0
        accent = stress == 1 and content and rng.random() < 0.5
        syllables.append(
            Syllable(phones=phones, stress=stress, nucleus=nucleus, pitch_accent=accent)
        )
    pos = str(rng.choice(_CONTENT_POS if content else _FUNCTION_POS))
    orth = "".join(p[0] for s in syllables for p in s.phones)
    return Word(
        orthography=orth,
        syllables=syllables,
        pos=pos,
        is_content=content,
        prominence=int(rng.integers(2, 4)) if content else int(rng.integers(0, 2)),
        break_index=1,
    )


def _random_utterance(rng, min_words=3, max_words=6):
    words = [_random_word(rng) for _ in range(int(rng.integers(min_words, max_words + 1)))]
    for w in words[:-1]:
        w.break_index = 3 if rng.random() < 0.25 else 1
    words[-1].break_index = 4
    return assemble_rep(words)


# ---------------------------------------------------------------------------
# Postlexical (flapping / t,d deletion) corpus
# ---------------------------------------------------------------------------

_FLAPPABLE = {"t", "d"}
_LAXING = {"iy": "ih", "uw": "uh"}


def postlex_rules(symbols, word_of, fs):
    """Deterministic connected-speech rules over an utterance phone stream.

    Conditions use only the adjacent phones (across word boundaries, like
    real connected speech) and word-final position, so they are a function
    of exactly what the postlexical net's window and boundary-distance
    inputs expose. Returns the per-word postlexical phone lists.

    - t/d after a vowel and before ah/ax -> flap dx (word edges included)
    - word-final t after a vowel -> glottal stop q
    - word-final t/d after a consonant -> deleted
    - word-final d after a vowel -> devoiced to t
    - word-final z -> devoiced to s
    - s between vowels -> voiced to z
    - ah/iy/uw before a consonant -> reduced ax / laxed ih, uh
    - eh before a nasal -> raised to ih
    - ao -> merged into aa; ay before a consonant -> monophthong aa
    """
    n = len(symbols)
    n_words = int(word_of[-1]) + 1 if n else 0
    out = [[] for _ in range(n_words)]
    for i, p in enumerate(symbols):
        prev_p = symbols[i - 1] if i > 0 else None
        next_p = symbols[i + 1] if i < n - 1 else None
        final = i == n - 1 or word_of[i + 1] != word_of[i]
        prev_vowel = prev_p is not None and fs.is_vowel(prev_p)
        next_cons = next_p is not None and not fs.is_vowel(next_p)
        w = int(word_of[i])
        if p in _FLAPPABLE and prev_vowel and next_p in ("ah", "ax"):
            out[w].append("dx")
        elif p == "t" and final and prev_vowel:
            out[w].append("q")
        elif p in _FLAPPABLE and final and prev_p is not None and not prev_vowel:
            continue  # deletion
        elif p == "d" and final and prev_vowel:
            out[w].append("t")
        elif p == "z" and final:
            out[w].append("s")
        elif p == "s" and prev_vowel and next_p is not None and fs.is_vowel(next_p):
            out[w].append("z")
        elif p == "ah" and next_cons:
            out[w].append("ax")
        elif p in _LAXING and next_cons:
            out[w].append(_LAXING[p])
        elif p == "eh" and next_p in ("m", "n", "ng"):
            out[w].append("ih")
        elif p == "ao":
            out[w].append("aa")
        elif p == "ay" and next_cons:
            out[w].append("aa")
        else:
            out[w].append(p)
    return out


def gen_flapping_corpus(fs, seed=0, size=400):
    """(rep, per-word postlexical phones) utterances, seed-determined."""
    from .phonology import flatten

    rng = np.random.default_rng(seed)
    corpus = []
    for _ in range(size):
        rep = _random_utterance(rng)
        flat = flatten(rep)
        corpus.append((rep, postlex_rules(flat.symbols, flat.word_of, fs)))
    return corpus


def identity_rate(corpus, fs):
    """Fraction of lexical phones that survive unchanged, slot-aligned."""
    from .align import align, phone_phone_cost
    from .phonology import flatten

    cm = phone_phone_cost(fs)
    total = 0
    same = 0
    for rep, postlex in corpus:
        flat = flatten(rep)
        words = {}
        for i, sym in enumerate(flat.symbols):
            words.setdefault(int(flat.word_of[i]), []).append(sym)
        for wi, lex in sorted(words.items()):
            alignment = align(lex, postlex[wi], cm)
            for a_sym, b_sym in alignment.pairs:
                if a_sym is None:
                    continue
                total += 1
                if a_sym == b_sym:
                    same += 1
    return same / total if total else 0.0


# ---------------------------------------------------------------------------
# Duration corpus (multiplicative rule factors)
# ---------------------------------------------------------------------------

_BASE_MS = {
    "vowel": 130.0,
    "tense": 150.0,
    "reduced": 85.0,
    "stop": 65.0,
    "fricative": 95.0,
    "affricate": 100.0,
    "nasal": 70.0,
    "approximant": 75.0,
}
_MIN_MS = {"vowel": 45.0, "consonant": 28.0}

#: Multiplicative factor applied when the matching RULE_CONDITIONS bit is set.
RULE_FACTORS = (1.40, 1.20, 0.68, 0.85, 1.10, 1.25, 0.90, 1.25)

_DURATION_NOISE_MS = 4.0


def _base_duration(phone, fs):
    feats = fs.features(phone)
    if "vocalic" in feats:
        if phone == "ax":
            return _BASE_MS["reduced"], _MIN_MS["vowel"]
        if "tense" in feats:
            return _BASE_MS["tense"], _MIN_MS["vowel"]
        return _BASE_MS["vowel"], _MIN_MS["vowel"]
    for kind in ("affricate", "fricative", "nasal", "approximant", "stop"):
        if kind in feats:
            return _BASE_MS[kind], _MIN_MS["consonant"]
    return _BASE_MS["stop"], _MIN_MS["consonant"]


def rule_duration(phone, bits, fs):
    """Klatt-style duration: min + (base - min) * product of rule factors."""
    base, floor = _base_duration(phone, fs)
    prcnt = 1.0
    for bit, factor in zip(bits, RULE_FACTORS):
        if bit:
            prcnt *= factor
    return floor + (base - floor) * prcnt


def gen_duration_corpus(fs, seed=0, size=300, noise_ms=_DURATION_NOISE_MS):
    """(rep, per-phone durations ms) utterances from the rule generator."""
    from .phonology import flatten
    from .prosody import _rule_bits, _syllable_flags

    rng = np.random.default_rng(seed)
    corpus = []
    for _ in range(size):
        rep = _random_utterance(rng)
        flat = flatten(rep)
        flags = _syllable_flags(flat)
        durs = []
        for i in range(len(flat)):
            bits = _rule_bits(flat, i, flags)
            d = rule_duration(flat.symbols[i], bits, fs)
            d += rng.uniform(-noise_ms, noise_ms)
            durs.append(max(d, 20.0))
        corpus.append((rep, durs))
    return corpus


# ---------------------------------------------------------------------------
# Synthetic vowel audio corpus
# ---------------------------------------------------------------------------

_VOWEL_FORMANTS = {
    "aa": (730.0, 1090.0, 2440.0),
    "ae": (660.0, 1720.0, 2410.0),
    "ah": (640.0, 1190.0, 2390.0),
    "eh": (530.0, 1840.0, 2480.0),
    "ih": (390.0, 1990.0, 2550.0),
    "iy": (270.0, 2290.0, 3010.0),
    "ow": (570.0, 840.0, 2410.0),
    "uw": (300.0, 870.0, 2240.0),
}
_FORMANT_BW = (80.0, 110.0, 150.0)


def vowel_lsf(vowel, cfg=DEFAULT_CONFIG):
    return lpc_to_lsf(formant_lpc(_VOWEL_FORMANTS[vowel], _FORMANT_BW, cfg))


def vowel_frames(vowels, durations_ms, cfg=DEFAULT_CONFIG, f0_start=130.0,
                 f0_end=95.0, power_db=-25.0):
    """Analytic frame track for a vowel sequence: declining f0, fully voiced
    excitation, LSFs interpolated linearly over phone transitions."""
    from .acoustic import frame_allocation

    phone_of, bounds = frame_allocation(durations_ms, cfg)
    n = int(bounds[-1])
    targets = [vowel_lsf(v, cfg) for v in vowels]
    frames = []
    for t in range(n):
        pi = int(phone_of[t])
        local = t - bounds[pi]
        count = bounds[pi + 1] - bounds[pi]
        frac = (local + 0.5) / count
        lsf = targets[pi]
        if frac > 0.8 and pi + 1 < len(targets):
            w = (frac - 0.8) / 0.4  # reaches 0.5 at the phone edge
            lsf = (1 - w) * targets[pi] + w * targets[pi + 1]
        f0 = f0_start + (f0_end - f0_start) * (t / max(n - 1, 1))
        frames.append(
            FrameParams(f0=f0, power_db=power_db, boundary_hz=cfg.nyquist, lsf=lsf)
        )
    return frames


def gen_vowel_corpus(fs, out_dir, seed=0, size=24, cfg=DEFAULT_CONFIG):
    """Synthetic vowel utterances: WAV files plus (rep, durations, path).

    Each utterance is a short sequence of single-vowel words rendered
    through the vocoder, so the segmentation is exact by construction.
    """
    rng = np.random.default_rng(seed)
    os.makedirs(out_dir, exist_ok=True)
    manifest = []
    for u in range(size):
        n_words = int(rng.integers(1, 4))
        vowels = [str(rng.choice(sorted(_VOWEL_FORMANTS))) for _ in range(n_words)]
        durs = [float(rng.uniform(120.0, 260.0)) for _ in vowels]
        words = [
            Word(
                orthography=v,
                syllables=[Syllable(phones=[v], stress=1, nucleus=0)],
                pos="UH",
                is_content=True,
                prominence=2,
                break_index=1,
            )
            for v in vowels
        ]
        rep = assemble_rep(words)
        frames = vowel_frames(vowels, durs, cfg)
        audio = synthesize(frames, cfg, seed=seed * 1000 + u)
        path = os.path.join(out_dir, f"utt_{u:04d}.wav")
        write_wav(audio, path)
        # Durations snapped to the rendered frame grid.
        from .acoustic import frame_allocation

        _, bounds = frame_allocation(durs, cfg)
        snapped = [float(np.diff(bounds)[i] * cfg.hop_ms) for i in range(len(durs))]
        manifest.append((rep, snapped, path))
    return manifest


# ---------------------------------------------------------------------------
# JSONL serialization
# ---------------------------------------------------------------------------


def utterance_to_doc(rep, postlex=None, durations=None, wav=None):
    words_out = []
    wi = 0
    di = 0
    for sent in rep.sentences:
        for clause in sent.clauses:
            for phrase in clause.phrases:
                for word in phrase.words:
                    doc = {
                        "orth": word.orthography,
                        "pos": word.pos,
                        "content": word.is_content,
                        "prominence": word.prominence,
                        "break": word.break_index,
                        "syllables": [
                            {
                                "phones": list(s.phones),
                                "stress": s.stress,
                                "nucleus": s.nucleus,
                                "accent": s.pitch_accent,
                            }
                            for s in word.syllables
                        ],
                    }
                    if postlex is not None:
                        doc["postlex"] = list(postlex[wi])
                    if durations is not None:
                        n = sum(len(s.phones) for s in word.syllables)
                        doc["durations"] = [float(d) for d in durations[di : di + n]]
                        di += n
                    words_out.append(doc)
                    wi += 1
    out = {"words": words_out}
    if wav is not None:
        out["wav"] = wav
    return out


def utterance_from_doc(doc, where="<corpus>"):
    words = []
    postlex = []
    durations = []
    has_postlex = False
    has_durations = False
    for wdoc in doc.get("words", []):
        try:
            syllables = [
                Syllable(
                    phones=list(s["phones"]),
                    stress=int(s["stress"]),
                    nucleus=int(s["nucleus"]),
                    pitch_accent=bool(s.get("accent", False)),
                )
                for s in wdoc["syllables"]
            ]
            words.append(
                Word(
                    orthography=wdoc["orth"],
                    syllables=syllables,
                    pos=wdoc.get("pos", "NN"),
                    is_content=bool(wdoc.get("content", True)),
                    prominence=int(wdoc.get("prominence", 1)),
                    break_index=int(wdoc.get("break", 1)),
                )
            )
        except (KeyError, TypeError, ValueError) as e:
            raise DataError(f"{where}: malformed word record: {e}") from e
        if "postlex" in wdoc:
            has_postlex = True
            postlex.append(list(wdoc["postlex"]))
        if "durations" in wdoc:
            has_durations = True
            durations.extend(float(d) for d in wdoc["durations"])
    rep = assemble_rep(words)
    return (
        rep,
        postlex if has_postlex else None,
        durations if has_durations else None,
        doc.get("wav"),
    )


def write_corpus(path, utterances):
    """utterances: iterable of (rep, postlex|None, durations|None, wav|None)."""
    with open(path, "w", encoding="utf-8") as f:
        for rep, postlex, durations, wav in utterances:
            doc = utterance_to_doc(rep, postlex, durations, wav)
            f.write(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")


def read_corpus(path):
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataError(f"{path}:{lineno}: bad JSON: {e}") from e
            out.append(utterance_from_doc(doc, f"{path}:{lineno}"))
    return out


# ---------------------------------------------------------------------------
# Pseudo-word lexicon (scales G2P training sets deterministically)
# ---------------------------------------------------------------------------

_SPELLING = {
    "aa": "o", "ae": "a", "ah": "u", "eh": "e", "ih": "i", "iy": "ee",
    "ow": "oa", "uw": "oo",
    "b": "b", "ch": "ch", "d": "d", "f": "f", "g": "g", "hh": "h",
    "jh": "j", "k": "k", "l": "l", "m": "m", "n": "n", "ng": "ng",
    "p": "p", "r": "r", "s": "s", "sh": "sh", "t": "t", "th": "th",
    "v": "v", "w": "w", "y": "y", "z": "z",
}


def pseudo_lexicon_rows(n, seed=0):
    """Deterministic pseudo-English rows (orth, 'NN', pron spec)."""
    rng = np.random.default_rng(seed)
    onsets = [p for p in _ONSETS if p in _SPELLING]
    vowels = [p for p in _VOWELS if p in _SPELLING]
    codas = ["", "d", "k", "l", "m", "n", "s", "t", "z"]
    rows = []
    seen = set()
    while len(rows) < n:
        n_syl = int(rng.integers(1, 4))
        stressed = int(rng.integers(0, n_syl))
        syl_specs = []
        orth = ""
        for k in range(n_syl):
            phones = []
            if rng.random() < 0.9:
                phones.append(str(rng.choice(onsets)))
            vowel = str(rng.choice(vowels))
            nucleus = len(phones)
            phones.append(vowel)
            if rng.random() < 0.5:
                coda = str(rng.choice(codas))
                if coda:
                    phones.append(coda)
            stress = 1 if k == stressed else 0
            spec = "-".join(
                p + (str(stress) if i == nucleus else "")
                for i, p in enumerate(phones)
            )
            syl_specs.append(spec)
            orth += "".join(_SPELLING[p] for p in phones)
        if orth in seen:
            continue
        seen.add(orth)
        rows.append((orth, "NN", ".".join(syl_specs)))
    return rows


def write_lexicon_rows(rows, path):
    with open(path, "w", encoding="utf-8") as f:
        for orth, pos, pron in rows:
            f.write(f"{orth}\t{pos}\t{pron}\n")
