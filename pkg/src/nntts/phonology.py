"""Phone inventory, phonological features, and the hierarchical utterance
structure consumed by every downstream stage.

The inventory, feature assignments, and letter->candidate-phone table ship
as UTF-8 TSV data files (see ``data/phones.tsv`` and ``data/letters.tsv``
for the line formats) and are loaded once at startup.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import DataError

EPSILON = "eps"

STRESS_LEVELS = (0, 1, 2)

#: ToBI-subset break indices: 0 clitic, 1 word, 2 weak phrase, 3 phrase,
#: 4 clause/sentence.
MAX_BREAK_INDEX = 4


@dataclass(frozen=True)
class Phone:
    symbol: str
    features: frozenset
    lexical_member: bool
    postlexical_member: bool


class FeatureSystem:
    """Phone inventory plus the letter->candidate-phone table.

    Immutable after construction; all lookups are safe for concurrent reads.
    """

    def __init__(self, phones, letter_candidates):
        self.phones = {}
        for p in phones:
            if p.symbol in self.phones:
                raise DataError(f"duplicate phone symbol: {p.symbol}")
            if p.symbol != EPSILON and not p.features:
                raise DataError(f"phone {p.symbol} has an empty feature set")
            self.phones[p.symbol] = p
        if EPSILON not in self.phones:
            raise DataError("inventory is missing the deletion symbol 'eps'")
        if self.phones[EPSILON].lexical_member:
            raise DataError("'eps' must not be a lexical alphabet member")

        self.letter_candidates = {}
        for letter, cands in letter_candidates.items():
            unknown = [c for c in cands if c not in self.phones]
            if unknown:
                raise DataError(
                    f"letter {letter!r} names unknown phones: {unknown}"
                )
            self.letter_candidates[letter] = tuple(cands)
        missing = [c for c in string.ascii_lowercase if c not in self.letter_candidates]
        if missing:
            raise DataError(f"letters without candidate phones: {missing}")

        self.symbols = tuple(self.phones)
        self.lexical_symbols = tuple(
            s for s in self.symbols if self.phones[s].lexical_member
        )
        self.postlexical_symbols = tuple(
            s for s in self.symbols if self.phones[s].postlexical_member
        )
        names = set()
        for p in self.phones.values():
            names |= p.features
        self.feature_names = tuple(sorted(names))
        self._findex = {f: i for i, f in enumerate(self.feature_names)}
        self._sindex = {s: i for i, s in enumerate(self.symbols)}
        self._vectors = {}
        for s, p in self.phones.items():
            v = np.zeros(len(self.feature_names))
            for f in p.features:
                v[self._findex[f]] = 1.0
            v.setflags(write=False)
            self._vectors[s] = v

    def __contains__(self, symbol):
        return symbol in self.phones

    def features(self, symbol):
        try:
            return self.phones[symbol].features
        except KeyError:
            raise DataError(f"unknown phone symbol: {symbol!r}") from None

    def phone_index(self, symbol):
        try:
            return self._sindex[symbol]
        except KeyError:
            raise DataError(f"unknown phone symbol: {symbol!r}") from None

    def feature_vector(self, symbol):
        """Binary feature vector over ``feature_names`` (read-only view)."""
        try:
            return self._vectors[symbol]
        except KeyError:
            raise DataError(f"unknown phone symbol: {symbol!r}") from None

    def letter_feature_vector(self, letter):
        v = np.zeros(len(self.feature_names))
        for f in letter_features(letter, self):
            v[self._findex[f]] = 1.0
        return v

    def is_vowel(self, symbol):
        return "vocalic" in self.features(symbol)


def letter_features(letter, fs):
    """Union of the feature sets of every phone the letter may stand for."""
    if letter not in fs.letter_candidates:
        raise DataError(f"no candidate phones for letter {letter!r}")
    out = frozenset()
    for sym in fs.letter_candidates[letter]:
        out |= fs.phones[sym].features
    return out


def _parse_phone_line(line, lineno, path):
    parts = line.split("\t")
    if len(parts) != 3:
        raise DataError(f"{path}:{lineno}: expected 3 tab-separated fields")
    symbol, flags, featspec = parts
    bad = set(flags) - {"L", "P"}
    if bad or not flags:
        raise DataError(f"{path}:{lineno}: bad flags {flags!r}")
    features = frozenset() if featspec == "-" else frozenset(featspec.split(","))
    if "" in features:
        raise DataError(f"{path}:{lineno}: empty feature name")
    return Phone(symbol, features, "L" in flags, "P" in flags)


def load_feature_system(phones_path=None, letters_path=None):
    """Load the inventory and letter table, defaulting to the shipped files."""
    if phones_path is None:
        phones_text = (
            resources.files("nntts.data").joinpath("phones.tsv").read_text("utf-8")
        )
    else:
        with open(phones_path, encoding="utf-8") as f:
            phones_text = f.read()
    if letters_path is None:
        letters_text = (
            resources.files("nntts.data").joinpath("letters.tsv").read_text("utf-8")
        )
    else:
        with open(letters_path, encoding="utf-8") as f:
            letters_text = f.read()

    phones = []
    for lineno, raw in enumerate(phones_text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        phones.append(_parse_phone_line(line, lineno, phones_path or "phones.tsv"))

    letters = {}
    for lineno, raw in enumerate(letters_text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(
                f"{letters_path or 'letters.tsv'}:{lineno}: expected 2 fields"
            )
        letters[parts[0]] = tuple(parts[1].split(","))

    return FeatureSystem(phones, letters)


# ---------------------------------------------------------------------------
# Hierarchical linguistic representation
# ---------------------------------------------------------------------------


@dataclass
class Syllable:
    phones: list
    stress: int = 0
    nucleus: int = 0
    pitch_accent: bool = False


@dataclass
class Word:
    orthography: str
    syllables: list
    pos: str = "NN"
    is_content: bool = True
    prominence: int = 1
    break_index: int = 1  # ToBI break after this word


@dataclass
class Phrase:
    words: list


@dataclass
class Clause:
    phrases: list


@dataclass
class Sentence:
    clauses: list


@dataclass
class LinguisticRep:
    sentences: list


@dataclass
class FlatRep:
    """Per-phone index arrays over a rep, shared by all the encoders."""

    symbols: list
    words: list
    syllables: list
    word_of: np.ndarray
    syl_of: np.ndarray
    phrase_of: np.ndarray
    clause_of: np.ndarray
    sentence_of: np.ndarray
    syl_word_of: np.ndarray  # word index per syllable
    syl_phrase_of: np.ndarray
    nucleus_offset: np.ndarray  # signed phone offset from the syllable nucleus

    def __len__(self):
        return len(self.symbols)


def flatten(rep):
    symbols = []
    words = []
    syllables = []
    word_of, syl_of, phrase_of, clause_of, sentence_of = [], [], [], [], []
    syl_word_of, syl_phrase_of = [], []
    nucleus_offset = []
    pi = ci = wi = -1
    for si, sent in enumerate(rep.sentences):
        for clause in sent.clauses:
            ci += 1
            for phrase in clause.phrases:
                pi += 1
                for word in phrase.words:
                    wi += 1
                    words.append(word)
                    for syl in word.syllables:
                        yi = len(syllables)
                        syllables.append(syl)
                        syl_word_of.append(wi)
                        syl_phrase_of.append(pi)
                        for k, ph in enumerate(syl.phones):
                            symbols.append(ph)
                            word_of.append(wi)
                            syl_of.append(yi)
                            phrase_of.append(pi)
                            clause_of.append(ci)
                            sentence_of.append(si)
                            nucleus_offset.append(k - syl.nucleus)
    return FlatRep(
        symbols=symbols,
        words=words,
        syllables=syllables,
        word_of=np.asarray(word_of, dtype=np.int64),
        syl_of=np.asarray(syl_of, dtype=np.int64),
        phrase_of=np.asarray(phrase_of, dtype=np.int64),
        clause_of=np.asarray(clause_of, dtype=np.int64),
        sentence_of=np.asarray(sentence_of, dtype=np.int64),
        syl_word_of=np.asarray(syl_word_of, dtype=np.int64),
        syl_phrase_of=np.asarray(syl_phrase_of, dtype=np.int64),
        nucleus_offset=np.asarray(nucleus_offset, dtype=np.int64),
    )


@dataclass
class BoundaryDistances:
    """Distances in phones to the enclosing unit edges, 0 when abutting."""

    prev_word: np.ndarray
    next_word: np.ndarray
    prev_phrase: np.ndarray
    next_phrase: np.ndarray
    prev_clause: np.ndarray
    next_clause: np.ndarray
    prev_sentence: np.ndarray
    next_sentence: np.ndarray


def _edge_distances(unit_of):
    n = len(unit_of)
    prev = np.zeros(n, dtype=np.int64)
    nxt = np.zeros(n, dtype=np.int64)
    for i in range(1, n):
        prev[i] = prev[i - 1] + 1 if unit_of[i] == unit_of[i - 1] else 0
    for i in range(n - 2, -1, -1):
        nxt[i] = nxt[i + 1] + 1 if unit_of[i] == unit_of[i + 1] else 0
    return prev, nxt


def boundary_distances(rep):
    flat = rep if isinstance(rep, FlatRep) else flatten(rep)
    pw, nw = _edge_distances(flat.word_of)
    pp, np_ = _edge_distances(flat.phrase_of)
    pc, nc = _edge_distances(flat.clause_of)
    ps, ns = _edge_distances(flat.sentence_of)
    return BoundaryDistances(pw, nw, pp, np_, pc, nc, ps, ns)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass
class Violation:
    path: str
    message: str

    def __str__(self):
        return f"{self.path}: {self.message}"


def validate(rep, fs=None):
    """Collect every invariant violation; an empty list means the rep is ok.

    Boundary nesting is checked through break indices: a phrase-final word
    must carry break >= 3 and a clause- or sentence-final word break 4, so
    every coarser boundary implies the finer ones.
    """
    violations = []

    def bad(path, msg):
        violations.append(Violation(path, msg))

    if not rep.sentences:
        bad("rep", "no sentences")
    for si, sent in enumerate(rep.sentences):
        spath = f"sentence[{si}]"
        if not sent.clauses:
            bad(spath, "no clauses")
        for ci, clause in enumerate(sent.clauses):
            cpath = f"{spath}.clause[{ci}]"
            if not clause.phrases:
                bad(cpath, "no phrases")
            for pi, phrase in enumerate(clause.phrases):
                ppath = f"{cpath}.phrase[{pi}]"
                if not phrase.words:
                    bad(ppath, "no words")
                for wi, word in enumerate(phrase.words):
                    wpath = f"{ppath}.word[{wi}]"
                    if not word.syllables:
                        bad(wpath, "no syllables")
                    if not 0 <= word.break_index <= MAX_BREAK_INDEX:
                        bad(wpath, f"break index {word.break_index} out of range")
                    if word.prominence < 0:
                        bad(wpath, f"negative prominence {word.prominence}")
                    phrase_final = wi == len(phrase.words) - 1
                    clause_final = phrase_final and pi == len(clause.phrases) - 1
                    if phrase_final and word.break_index < 3:
                        bad(
                            wpath,
                            "phrase-final word needs break >= 3, "
                            f"got {word.break_index}",
                        )
                    if clause_final and word.break_index < 4:
                        bad(
                            wpath,
                            "clause-final word needs break 4, "
                            f"got {word.break_index} (nesting violation)",
                        )
                    for yi, syl in enumerate(word.syllables):
                        ypath = f"{wpath}.syllable[{yi}]"
                        if not syl.phones:
                            bad(ypath, "no phones")
                            continue
                        if not 0 <= syl.nucleus < len(syl.phones):
                            bad(ypath, f"nucleus index {syl.nucleus} out of range")
                        if syl.stress not in STRESS_LEVELS:
                            bad(ypath, f"stress {syl.stress} not in 0/1/2")
                        if fs is not None:
                            for ph in syl.phones:
                                if ph not in fs:
                                    bad(ypath, f"unknown phone {ph!r}")
    return violations


# ---------------------------------------------------------------------------
# Syllabification for G2P output
# ---------------------------------------------------------------------------


def naive_syllabify(phones, fs):
    """Split a flat phone string into syllables around vowel nuclei.

    Consonants between two nuclei contribute their last phone to the next
    onset; a vowel-less input becomes one syllable with the final phone as
    nucleus. First syllable takes primary stress.
    """
    if not phones:
        return []
    nuclei = [i for i, p in enumerate(phones) if fs.is_vowel(p)]
    if not nuclei:
        return [Syllable(phones=list(phones), stress=1, nucleus=len(phones) - 1)]
    starts = [0]
    for a, b in zip(nuclei, nuclei[1:]):
        gap = b - a - 1
        starts.append(b if gap == 0 else b - 1)
    bounds = starts + [len(phones)]
    out = []
    for k, (lo, hi) in enumerate(zip(bounds, bounds[1:])):
        seg = list(phones[lo:hi])
        out.append(
            Syllable(phones=seg, stress=1 if k == 0 else 0, nucleus=nuclei[k] - lo)
        )
    return out
