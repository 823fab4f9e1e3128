"""Text preprocessing, the pronunciation lexicon, and POS disambiguation.

Lexicon rows are TSV: ``orthography<TAB>POS[,POS...]<TAB>pronunciation``
where the pronunciation lists syllables separated by ``.``, phones inside a
syllable separated by ``-``, and a stress digit 0/1/2 suffixed to the
nucleus phone (``live<TAB>JJ<TAB>l-ay1-v``). The tagger is a bigram HMM
with add-k smoothing; homographs resolve by picking the variant whose POS
set contains the predicted tag.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass

from .errors import DataError
from .phonology import Syllable

_TOKEN_RE = re.compile(r"[a-z']+|[0-9]+|[.,!?;:]")
_SENTENCE_END = {".", "!", "?"}

#: Punctuation treated as a phrase break when building utterance structure.
PHRASE_BREAKS = {",", ";", ":"}

OPEN_CLASS_TAGS = {
    "NN", "NNS", "NNP", "VB", "VBD", "VBG", "VBN", "VBZ",
    "JJ", "JJR", "JJS", "RB", "UH",
}

_UNITS = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
    "sixteen", "seventeen", "eighteen", "nineteen",
]
_TENS = [
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy",
    "eighty", "ninety",
]
_SCALES = ["", "thousand", "million", "billion"]


def expand_number(digits):
    """Digit string -> number words ('42' -> ['forty', 'two'])."""
    value = int(digits)
    if value == 0:
        return ["zero"]
    groups = []
    while value > 0:
        groups.append(value % 1000)
        value //= 1000
    if len(groups) > len(_SCALES):
        # Beyond billions: read digit by digit.
        return [_UNITS[int(d)] for d in digits]
    words = []
    for gi in range(len(groups) - 1, -1, -1):
        g = groups[gi]
        if g == 0:
            continue
        hundreds, rest = divmod(g, 100)
        if hundreds:
            words += [_UNITS[hundreds], "hundred"]
        if rest >= 20:
            words.append(_TENS[rest // 10])
            if rest % 10:
                words.append(_UNITS[rest % 10])
        elif rest:
            words.append(_UNITS[rest])
        if _SCALES[gi]:
            words.append(_SCALES[gi])
    return words


def tokenize(text):
    """Lowercased tokens grouped into sentences.

    Terminal punctuation closes a sentence and stays as its last token;
    commas and the like are retained as phrase-boundary cues; digit runs are
    expanded to number words.
    """
    sentences = []
    current = []
    for tok in _TOKEN_RE.findall(text.lower()):
        if tok[0].isdigit():
            current.extend(expand_number(tok))
            continue
        tok = tok.strip("'")
        if not tok:
            continue
        current.append(tok)
        if tok in _SENTENCE_END:
            sentences.append(current)
            current = []
    if current:
        sentences.append(current)
    return sentences


def render_tokens(sentences):
    """Inverse-ish of tokenize, for idempotence checks."""
    return " ".join(" ".join(s) for s in sentences)


# ---------------------------------------------------------------------------
# Lexicon
# ---------------------------------------------------------------------------


@dataclass
class Variant:
    pos_tags: tuple
    syllables: list

    def phones(self):
        return [p for syl in self.syllables for p in syl.phones]


@dataclass
class LexEntry:
    orthography: str
    variants: list


class Lexicon:
    def __init__(self):
        self.entries = {}

    def __len__(self):
        return len(self.entries)

    def __contains__(self, orth):
        return orth in self.entries

    def add(self, orth, pos_tags, syllables, where="<lexicon>"):
        entry = self.entries.setdefault(orth, LexEntry(orth, []))
        key = tuple(
            (tuple(s.phones), s.stress, s.nucleus) for s in syllables
        )
        for variant in entry.variants:
            overlap = set(pos_tags) & set(variant.pos_tags)
            if overlap:
                raise DataError(
                    f"{where}: duplicate (orthography, POS) row: "
                    f"{orth!r} with {sorted(overlap)}"
                )
            vkey = tuple(
                (tuple(s.phones), s.stress, s.nucleus) for s in variant.syllables
            )
            if vkey == key:
                # Homophonous rows merge into one variant record.
                variant.pos_tags = tuple(
                    dict.fromkeys(list(variant.pos_tags) + list(pos_tags))
                )
                return
        entry.variants.append(Variant(tuple(pos_tags), syllables))


def parse_pronunciation(spec, fs, where="<pron>"):
    """Parse a syllabified pronunciation string into Syllable objects."""
    syllables = []
    for syl_spec in spec.split("."):
        phones = []
        nucleus = None
        stress = None
        for item in syl_spec.split("-"):
            if not item:
                raise DataError(f"{where}: empty phone in {spec!r}")
            if item[-1] in "012":
                if nucleus is not None:
                    raise DataError(
                        f"{where}: two stress-marked nuclei in syllable {syl_spec!r}"
                    )
                nucleus = len(phones)
                stress = int(item[-1])
                item = item[:-1]
            if item not in fs:
                raise DataError(f"{where}: unknown phone symbol {item!r}")
            phones.append(item)
        if nucleus is None:
            raise DataError(f"{where}: syllable {syl_spec!r} has no stress-marked nucleus")
        syllables.append(Syllable(phones=phones, stress=stress, nucleus=nucleus))
    return syllables


def load_lexicon(path, fs):
    lex = Lexicon()
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 tab-separated fields")
            orth, pos_spec, pron_spec = parts
            pos_tags = tuple(p for p in pos_spec.split(",") if p)
            if not pos_tags:
                raise DataError(f"{path}:{lineno}: no POS tags")
            syllables = parse_pronunciation(pron_spec, fs, f"{path}:{lineno}")
            lex.add(orth.lower(), pos_tags, syllables, f"{path}:{lineno}")
    return lex


def lookup(token, tag, lex):
    """Variant whose POS set contains tag; first variant otherwise.

    Returns None when the token is out of lexicon (routing it to G2P).
    """
    entry = lex.entries.get(token)
    if entry is None:
        return None
    for variant in entry.variants:
        if tag in variant.pos_tags:
            return variant
    return entry.variants[0]


# ---------------------------------------------------------------------------
# Bigram HMM tagger
# ---------------------------------------------------------------------------

_START = "<s>"


@dataclass
class TagModel:
    tags: tuple
    transitions: dict  # (prev_tag|<s>, tag) -> count
    prev_totals: dict
    emissions: dict  # (tag, token) -> count
    tag_totals: dict
    vocabulary: tuple
    k: float = 0.1

    def transition_logprob(self, prev, tag):
        c = self.transitions.get((prev, tag), 0)
        total = self.prev_totals.get(prev, 0)
        return math.log((c + self.k) / (total + self.k * len(self.tags)))

    def emission_logprob(self, tag, token):
        if token in self._vocab_set:
            c = self.emissions.get((tag, token), 0)
            total = self.tag_totals.get(tag, 0)
            return math.log(
                (c + self.k) / (total + self.k * len(self.vocabulary))
            )
        open_tags = self._open_tags
        if tag in open_tags:
            return -math.log(len(open_tags))
        return -math.inf

    def sequence_logprob(self, tokens, tags):
        """Joint log probability of one tag sequence; the tagging oracle."""
        lp = 0.0
        prev = _START
        for token, tag in zip(tokens, tags):
            lp += self.transition_logprob(prev, tag)
            lp += self.emission_logprob(tag, token)
            prev = tag
        return lp

    def __post_init__(self):
        self._vocab_set = set(self.vocabulary)
        open_tags = tuple(t for t in self.tags if t in OPEN_CLASS_TAGS)
        self._open_tags = set(open_tags if open_tags else self.tags)


def train_tagger(tagged_sentences, k=0.1):
    """Assemble bigram transition and emission counts with add-k smoothing."""
    tagged_sentences = list(tagged_sentences)
    if not tagged_sentences or all(not s for s in tagged_sentences):
        raise DataError("empty tagged corpus")
    transitions = {}
    prev_totals = {}
    emissions = {}
    tag_totals = {}
    tags = set()
    vocab = set()
    for sent in tagged_sentences:
        prev = _START
        for token, tag in sent:
            tags.add(tag)
            vocab.add(token)
            transitions[(prev, tag)] = transitions.get((prev, tag), 0) + 1
            prev_totals[prev] = prev_totals.get(prev, 0) + 1
            emissions[(tag, token)] = emissions.get((tag, token), 0) + 1
            tag_totals[tag] = tag_totals.get(tag, 0) + 1
            prev = tag
    return TagModel(
        tags=tuple(sorted(tags)),
        transitions=transitions,
        prev_totals=prev_totals,
        emissions=emissions,
        tag_totals=tag_totals,
        vocabulary=tuple(sorted(vocab)),
        k=k,
    )


def pos_tag(tokens, model):
    """Viterbi-optimal tag sequence under the bigram model."""
    if not tokens:
        return []
    tags = model.tags
    n = len(tags)
    score = [
        model.transition_logprob(_START, t) + model.emission_logprob(t, tokens[0])
        for t in tags
    ]
    back = []
    for token in tokens[1:]:
        nxt = [-math.inf] * n
        arg = [0] * n
        for j, tag in enumerate(tags):
            em = model.emission_logprob(tag, token)
            if em == -math.inf:
                nxt[j] = -math.inf
                continue
            best = -math.inf
            besti = 0
            for i, prev in enumerate(tags):
                s = score[i] + model.transition_logprob(prev, tag)
                if s > best:
                    best = s
                    besti = i
            nxt[j] = best + em
            arg[j] = besti
        back.append(arg)
        score = nxt
    j = max(range(n), key=lambda i: score[i])
    path = [j]
    for arg in reversed(back):
        j = arg[j]
        path.append(j)
    path.reverse()
    return [tags[i] for i in path]


def load_tagged_corpus(path):
    """One sentence per line of whitespace-separated token/TAG items."""
    sentences = []
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            sent = []
            for item in line.split():
                if "/" not in item:
                    raise DataError(f"{path}:{lineno}: item {item!r} lacks /TAG")
                token, _, tag = item.rpartition("/")
                if not token or not tag:
                    raise DataError(f"{path}:{lineno}: malformed item {item!r}")
                sent.append((token.lower(), tag))
            sentences.append(sent)
    return sentences


_TAG_MODEL_VERSION = 1


def save_tag_model(model, path):
    doc = {
        "version": _TAG_MODEL_VERSION,
        "k": model.k,
        "tags": list(model.tags),
        "vocabulary": list(model.vocabulary),
        "transitions": [[p, t, c] for (p, t), c in sorted(model.transitions.items())],
        "prev_totals": sorted(model.prev_totals.items()),
        "emissions": [[t, w, c] for (t, w), c in sorted(model.emissions.items())],
        "tag_totals": sorted(model.tag_totals.items()),
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, sort_keys=True, separators=(",", ":"))


def load_tag_model(path):
    try:
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
        if doc.get("version") != _TAG_MODEL_VERSION:
            raise DataError(
                f"{path}: tagger model version {doc.get('version')}, "
                f"expected {_TAG_MODEL_VERSION}"
            )
        return TagModel(
            tags=tuple(doc["tags"]),
            transitions={(p, t): c for p, t, c in doc["transitions"]},
            prev_totals=dict((k, v) for k, v in doc["prev_totals"]),
            emissions={(t, w): c for t, w, c in doc["emissions"]},
            tag_totals=dict((k, v) for k, v in doc["tag_totals"]),
            vocabulary=tuple(doc["vocabulary"]),
            k=doc["k"],
        )
    except (KeyError, ValueError, TypeError) as e:
        raise DataError(f"{path}: malformed tagger model: {e}") from e
