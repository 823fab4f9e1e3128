"""The two linguistic networks: letter-to-sound for out-of-lexicon words
and lexical-to-postlexical pronunciation conversion.

Both are windowed classifiers (nine-slot input windows) built on the nn
engine. Letter-to-sound classes include the deletion symbol and composite
pseudo-phones (one letter standing for two phones, e.g. 'x' -> k+s) that
alignment discovers in the training lexicon; the postlexical classes are
the postlexical phone alphabet including deletion.
"""

from __future__ import annotations

from copy import deepcopy
from dataclasses import dataclass

import numpy as np

from . import nn
from .align import align, letter_phone_cost, phone_phone_cost
from .errors import DataError, ModelError
from .phonology import EPSILON, boundary_distances, flatten, naive_syllabify

G2P_RADIUS = 4
POSTLEX_RADIUS = 4
#: A word pair is unalignable when total cost exceeds this times max length.
UNALIGNABLE_FACTOR = 1.5
COMPOSITE_MAX = 2
COMPOSITE_SEP = "+"
#: Boundary distances are clipped here and scaled to [0, 1] for net input.
DISTANCE_CLIP = 10.0


@dataclass(frozen=True)
class G2PAlphabet:
    classes: tuple

    def __len__(self):
        return len(self.classes)

    def index(self, name):
        try:
            return self.classes.index(name)
        except ValueError:
            raise ModelError(f"unknown G2P class {name!r}") from None

    def expand(self, name):
        """Class name -> phone sequence; deletion expands to nothing."""
        if name == EPSILON:
            return []
        return name.split(COMPOSITE_SEP)


@dataclass(frozen=True)
class PostlexAlphabet:
    classes: tuple  # postlexical phones, deletion symbol included

    def __len__(self):
        return len(self.classes)

    def index(self, name):
        try:
            return self.classes.index(name)
        except ValueError:
            raise ModelError(f"unknown postlexical class {name!r}") from None


def postlex_alphabet(fs):
    classes = fs.postlexical_symbols
    for required in ("dx", "q", EPSILON):
        if required not in classes:
            raise DataError(f"postlexical alphabet is missing {required!r}")
    return PostlexAlphabet(classes=classes)


# ---------------------------------------------------------------------------
# Input encodings
# ---------------------------------------------------------------------------


def letter_slot_dim(fs):
    return 26 + len(fs.feature_names) + 1  # one-hot + features + pad flag


def letter_slot_vector(letter, fs):
    v = np.zeros(letter_slot_dim(fs))
    v[ord(letter) - 97] = 1.0
    v[26 : 26 + len(fs.feature_names)] = fs.letter_feature_vector(letter)
    return v


def letter_pad_vector(fs):
    v = np.zeros(letter_slot_dim(fs))
    v[-1] = 1.0
    return v


def phone_slot_dim(fs):
    return len(fs.symbols) + len(fs.feature_names) + 1


def phone_slot_vector(symbol, fs):
    v = np.zeros(phone_slot_dim(fs))
    v[fs.phone_index(symbol)] = 1.0
    v[len(fs.symbols) : len(fs.symbols) + len(fs.feature_names)] = fs.feature_vector(
        symbol
    )
    return v


def phone_pad_vector(fs):
    v = np.zeros(phone_slot_dim(fs))
    v[-1] = 1.0
    return v


def g2p_input_dim(fs):
    return (2 * G2P_RADIUS + 1) * letter_slot_dim(fs)


def postlex_input_dim(fs):
    return (2 * POSTLEX_RADIUS + 1) * phone_slot_dim(fs) + 4


# ---------------------------------------------------------------------------
# Letter-phone attachment
# ---------------------------------------------------------------------------


def _word_letters(orth):
    return [c for c in orth if "a" <= c <= "z"]


def _attach_phones(pairs, cm):
    """Distribute aligned phones onto letters.

    Substituted phones stay with their letter; inserted phones land on the
    preceding letter first and then migrate right when the following letter
    prices the substitution cheaper, which keeps digraph output like
    'x' -> /k s/ on the letter that licenses it.
    """
    letters = []
    assignments = []
    pending = []  # inserted phones seen before the first letter
    for a_sym, b_sym in pairs:
        if a_sym is not None:
            letters.append(a_sym)
            assigned = pending
            pending = []
            if b_sym is not None:
                assigned.append(b_sym)
            assignments.append(assigned)
        elif letters:
            assignments[-1].append(b_sym)
        else:
            pending.append(b_sym)
    for i in range(len(letters) - 1):
        while len(assignments[i]) > 1:
            ph = assignments[i][-1]
            here = cm.substitution_cost(letters[i], ph)
            there = cm.substitution_cost(letters[i + 1], ph)
            if there < here:
                assignments[i].pop()
                assignments[i + 1].insert(0, ph)
            else:
                break
    return letters, assignments


def _letter_classes(orth, phones, cm):
    """Per-letter class names for one word, or None if unalignable."""
    letters = _word_letters(orth)
    if not letters or not phones:
        return None
    alignment = align(letters, phones, cm)
    if alignment.total_cost > UNALIGNABLE_FACTOR * max(len(letters), len(phones)):
        return None
    letters, assignments = _attach_phones(alignment.pairs, cm)
    classes = []
    for assigned in assignments:
        if len(assigned) > COMPOSITE_MAX:
            return None
        if not assigned:
            classes.append(EPSILON)
        else:
            classes.append(COMPOSITE_SEP.join(assigned))
    return letters, classes


# ---------------------------------------------------------------------------
# G2P dataset and prediction
# ---------------------------------------------------------------------------


@dataclass
class G2PDataset:
    inputs: np.ndarray
    targets: np.ndarray  # one-hot rows
    alphabet: G2PAlphabet
    n_words: int
    skipped: list


def build_g2p_dataset(lex, fs, cm=None):
    """One training sample per letter of every lexicon entry.

    Words are aligned letter-to-phone under the feature cost model; entries
    whose alignment cost exceeds the unalignable threshold (or that need
    more than two phones on one letter) are skipped and reported.
    """
    cm = cm or letter_phone_cost(fs)
    per_word = []
    skipped = []
    composites = set()
    for orth, entry in lex.entries.items():
        phones = entry.variants[0].phones()
        result = _letter_classes(orth, phones, cm)
        if result is None:
            skipped.append(orth)
            continue
        letters, classes = result
        per_word.append((letters, classes))
        for c in classes:
            if COMPOSITE_SEP in c:
                composites.add(c)
    classes = tuple(list(fs.lexical_symbols) + [EPSILON] + sorted(composites))
    alphabet = G2PAlphabet(classes=classes)

    pad = letter_pad_vector(fs)
    rows = []
    targets = []
    for letters, word_classes in per_word:
        slots = [letter_slot_vector(c, fs) for c in letters]
        for i, cls in enumerate(word_classes):
            rows.append(nn.assemble_window(slots, i, G2P_RADIUS, pad))
            t = np.zeros(len(alphabet.classes))
            t[alphabet.index(cls)] = 1.0
            targets.append(t)
    if not rows:
        raise DataError("no alignable entries in the lexicon")
    return G2PDataset(
        inputs=np.array(rows),
        targets=np.array(targets),
        alphabet=alphabet,
        n_words=len(per_word),
        skipped=skipped,
    )


def g2p_predict(word, net, fs, alphabet):
    """Per-letter argmax classes, deletions dropped, composites expanded."""
    letters = _word_letters(word.lower())
    if not letters:
        return []
    pad = letter_pad_vector(fs)
    slots = [letter_slot_vector(c, fs) for c in letters]
    xs = np.array(
        [nn.assemble_window(slots, i, G2P_RADIUS, pad) for i in range(len(letters))]
    )
    ys = nn.forward_batch(net, xs)
    phones = []
    for row in ys:
        phones.extend(alphabet.expand(alphabet.classes[int(np.argmax(row))]))
    if not phones:
        raise ModelError(f"letter-to-sound produced an empty pronunciation for {word!r}")
    return phones


# ---------------------------------------------------------------------------
# Postlexical dataset and prediction
# ---------------------------------------------------------------------------


def encode_postlex_inputs(rep, fs):
    """One input row per phone: nine-phone window plus boundary distances."""
    flat = flatten(rep)
    dists = boundary_distances(flat)
    pad = phone_pad_vector(fs)
    slots = [phone_slot_vector(sym, fs) for sym in flat.symbols]
    rows = []
    for i in range(len(flat)):
        ctx = nn.assemble_window(slots, i, POSTLEX_RADIUS, pad)
        d = (
            np.minimum(
                [
                    dists.next_word[i],
                    dists.next_phrase[i],
                    dists.next_clause[i],
                    dists.next_sentence[i],
                ],
                DISTANCE_CLIP,
            )
            / DISTANCE_CLIP
        )
        rows.append(np.concatenate((ctx, d)))
    return flat, np.array(rows)


@dataclass
class PostlexDataset:
    inputs: np.ndarray
    targets: np.ndarray
    alphabet: PostlexAlphabet
    center_phones: list  # lexical phone at each sample's window center
    skipped: int


def build_postlex_dataset(corpus, fs, cm=None):
    """Samples from (rep, per-word postlexical pronunciation) utterances.

    Lexical phones come from the rep; each word is aligned against its
    postlexical phones and every lexical phone yields one sample whose
    target is the substituted postlexical phone or the deletion class.
    Postlexical insertions have no lexical anchor and are not sampled.
    """
    cm = cm or phone_phone_cost(fs)
    alphabet = postlex_alphabet(fs)
    rows = []
    targets = []
    centers = []
    skipped = 0
    for rep, postlex_words in corpus:
        flat, inputs = encode_postlex_inputs(rep, fs)
        n_words = flat.word_of[-1] + 1 if len(flat) else 0
        if n_words != len(postlex_words):
            raise DataError(
                f"utterance has {n_words} words but {len(postlex_words)} "
                "postlexical pronunciations"
            )
        offset = 0
        for wi in range(n_words):
            lex_phones = [
                flat.symbols[k] for k in range(len(flat)) if flat.word_of[k] == wi
            ]
            post = postlex_words[wi]
            alignment = align(lex_phones, post, cm)
            if alignment.total_cost > UNALIGNABLE_FACTOR * max(
                len(lex_phones), len(post)
            ):
                skipped += 1
                offset += len(lex_phones)
                continue
            li = 0
            for a_sym, b_sym in alignment.pairs:
                if a_sym is None:
                    continue  # insertion: no lexical anchor
                cls = b_sym if b_sym is not None else EPSILON
                t = np.zeros(len(alphabet))
                t[alphabet.index(cls)] = 1.0
                rows.append(inputs[offset + li])
                targets.append(t)
                centers.append(a_sym)
                li += 1
            offset += len(lex_phones)
    if not rows:
        raise DataError("postlexical corpus produced no samples")
    return PostlexDataset(
        inputs=np.array(rows),
        targets=np.array(targets),
        alphabet=alphabet,
        center_phones=centers,
        skipped=skipped,
    )


def postlex_predict(rep, net, fs, alphabet=None):
    """Per-word postlexical phone sequences; deletion drops the phone."""
    alphabet = alphabet or postlex_alphabet(fs)
    flat, inputs = encode_postlex_inputs(rep, fs)
    if not len(flat):
        return []
    ys = nn.forward_batch(net, inputs)
    n_words = flat.word_of[-1] + 1
    out = [[] for _ in range(n_words)]
    for i in range(len(flat)):
        cls = alphabet.classes[int(np.argmax(ys[i]))]
        if cls != EPSILON:
            out[flat.word_of[i]].append(cls)
    return out


def apply_postlex(rep, postlex_words, fs):
    """Rebuild a rep with each word's phones replaced by postlexical ones.

    Words are re-syllabified around the surviving nuclei; stress and accent
    marks carry over positionally from the original syllables. A word whose
    postlexical form lost every phone keeps its lexical pronunciation.
    """
    new_rep = deepcopy(rep)
    wi = 0
    for sent in new_rep.sentences:
        for clause in sent.clauses:
            for phrase in clause.phrases:
                for word in phrase.words:
                    phones = postlex_words[wi]
                    wi += 1
                    if not phones:
                        continue
                    syls = naive_syllabify(phones, fs)
                    for k, syl in enumerate(syls):
                        if k < len(word.syllables):
                            syl.stress = word.syllables[k].stress
                            syl.pitch_accent = word.syllables[k].pitch_accent
                    word.syllables = syls
    return new_rep


def make_identity_net(fs, alphabet=None, gain=12.0):
    """Single-layer softmax net wired to echo the window's center phone."""
    alphabet = alphabet or postlex_alphabet(fs)
    in_dim = postlex_input_dim(fs)
    out_dim = len(alphabet)
    w = np.zeros((out_dim, in_dim))
    center_base = POSTLEX_RADIUS * phone_slot_dim(fs)
    for ci, cls in enumerate(alphabet.classes):
        if cls == EPSILON:
            continue
        w[ci, center_base + fs.phone_index(cls)] = gain
    return nn.Network(
        sizes=[in_dim, out_dim],
        weights=[w],
        biases=[np.zeros(out_dim)],
        hidden_activation="tanh",
        output_activation="softmax",
    )


def postlex_metrics(predictions, references, lexical):
    """Phone-level accuracy and the no-change baseline, as percentages."""
    if not (len(predictions) == len(references) == len(lexical)):
        raise DataError(
            f"metric inputs disagree in length: {len(predictions)} predictions, "
            f"{len(references)} references, {len(lexical)} lexical phones"
        )
    if not references:
        raise DataError("no reference slots to score")
    n = len(references)
    acc = sum(p == r for p, r in zip(predictions, references)) / n
    ident = sum(l == r for l, r in zip(lexical, references)) / n
    return {"accuracy": 100.0 * acc, "identity_baseline": 100.0 * ident}
