"""Global sequence alignment under a pluggable cost model.

Used twice in the pipeline: letters vs. phones when building letter-to-sound
training data, and lexical vs. postlexical phone strings. Gaps are None in
the pair list; costs are minimized and ties resolve substitution > deletion
> insertion during backtrace so datasets are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DataError
from .phonology import letter_features

#: Constant insertion/deletion price for the feature-based cost models.
DEFAULT_INDEL = 0.9

BRUTE_FORCE_MAX = 6


@dataclass(frozen=True)
class CostModel:
    substitution_cost: object  # callable (a, b) -> float >= 0
    insertion_cost: float
    deletion_cost: float


@dataclass
class Alignment:
    pairs: list  # [(a_sym | None, b_sym | None), ...]
    total_cost: float

    def a_side(self):
        return [a for a, _ in self.pairs if a is not None]

    def b_side(self):
        return [b for _, b in self.pairs if b is not None]


def _check(alignment, a, b):
    assert alignment.a_side() == list(a), "alignment does not reconstruct a"
    assert alignment.b_side() == list(b), "alignment does not reconstruct b"
    assert all(pair != (None, None) for pair in alignment.pairs)


def align(a, b, cm):
    """Minimum-cost global alignment of sequences a and b."""
    n, m = len(a), len(b)
    sub = np.empty((n, m)) if n and m else np.zeros((n, m))
    for i in range(n):
        for j in range(m):
            sub[i, j] = cm.substitution_cost(a[i], b[j])
    dist, moves = _kernels.dp_fill(sub, cm.deletion_cost, cm.insertion_cost)
    pairs = []
    i, j = n, m
    while i > 0 or j > 0:
        mv = moves[i, j]
        if mv == _kernels.MOVE_SUB:
            i -= 1
            j -= 1
            pairs.append((a[i], b[j]))
        elif mv == _kernels.MOVE_DEL:
            i -= 1
            pairs.append((a[i], None))
        else:
            j -= 1
            pairs.append((None, b[j]))
    pairs.reverse()
    out = Alignment(pairs=pairs, total_cost=float(dist[n, m]))
    if __debug__:
        _check(out, a, b)
    return out


def brute_force_align(a, b, cm):
    """Exhaustive minimum over all gapped pairings; test oracle only.

    Costs accumulate left to right along each candidate pairing, the same
    association order the dynamic program uses, so optimal totals compare
    exactly. Prefixes already costlier than the best complete pairing are
    cut, which is sound because all costs are non-negative.
    """
    if len(a) > BRUTE_FORCE_MAX or len(b) > BRUTE_FORCE_MAX:
        raise DataError(
            f"brute_force_align limited to length {BRUTE_FORCE_MAX} sequences"
        )
    best_cost = None
    best_pairs = None
    pairs = []

    def walk(i, j, cost):
        nonlocal best_cost, best_pairs
        if best_cost is not None and cost > best_cost:
            return
        if i == len(a) and j == len(b):
            if best_cost is None or cost < best_cost:
                best_cost = cost
                best_pairs = list(pairs)
            return
        if i < len(a) and j < len(b):
            pairs.append((a[i], b[j]))
            walk(i + 1, j + 1, cost + cm.substitution_cost(a[i], b[j]))
            pairs.pop()
        if i < len(a):
            pairs.append((a[i], None))
            walk(i + 1, j, cost + cm.deletion_cost)
            pairs.pop()
        if j < len(b):
            pairs.append((None, b[j]))
            walk(i, j + 1, cost + cm.insertion_cost)
            pairs.pop()

    walk(0, 0, 0.0)
    return Alignment(pairs=best_pairs, total_cost=best_cost)


def _jaccard_dissimilarity(fa, fb):
    union = fa | fb
    if not union:
        return 0.0
    return 1.0 - len(fa & fb) / len(union)


def letter_phone_cost(fs, indel=DEFAULT_INDEL):
    """Cost model for aligning spellings with phone strings.

    Substituting a letter with a phone costs the Jaccard dissimilarity of
    the letter's candidate-union feature set against the phone's features.
    """
    cache = {}

    def sub(letter, phone):
        key = (letter, phone)
        if key not in cache:
            cache[key] = _jaccard_dissimilarity(
                letter_features(letter, fs), fs.features(phone)
            )
        return cache[key]

    return CostModel(substitution_cost=sub, insertion_cost=indel, deletion_cost=indel)


def phone_phone_cost(fs, indel=DEFAULT_INDEL):
    """Cost model between lexical and postlexical phone strings.

    Identical symbols are free; otherwise feature Jaccard, which prices the
    postlexical-only flap and glottal stop against their lexical neighbours.
    The deletion symbol never substitutes: deletions go through the indel
    costs.
    """
    cache = {}

    def sub(pa, pb):
        if pa == pb:
            return 0.0
        key = (pa, pb)
        if key not in cache:
            cache[key] = _jaccard_dissimilarity(fs.features(pa), fs.features(pb))
        return cache[key]

    return CostModel(substitution_cost=sub, insertion_cost=indel, deletion_cost=indel)
