import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nntts import phonology as ph
from nntts.errors import DataError


def test_inventory_invariants(fs):
    assert len(set(fs.symbols)) == len(fs.symbols)
    eps = fs.phones[ph.EPSILON]
    assert not eps.lexical_member and eps.postlexical_member
    for sym in ("dx", "q"):
        assert not fs.phones[sym].lexical_member
        assert fs.phones[sym].postlexical_member
    for sym, phone in fs.phones.items():
        if sym != ph.EPSILON:
            assert phone.features, sym


def test_every_letter_has_candidates(fs):
    for c in "abcdefghijklmnopqrstuvwxyz":
        assert fs.letter_candidates[c]


def test_letter_features_c_is_union_of_s_and_k(fs):
    assert set(fs.letter_candidates["c"]) == {"k", "s"}
    got = ph.letter_features("c", fs)
    assert got == fs.features("s") | fs.features("k")


def test_letter_features_single_candidate(fs):
    assert ph.letter_features("b", fs) == fs.features("b")


def test_letter_features_x_three_way_union(fs):
    assert set(fs.letter_candidates["x"]) == {"k", "s", "z"}
    got = ph.letter_features("x", fs)
    assert got == fs.features("k") | fs.features("s") | fs.features("z")


def test_letter_features_unknown_letter(fs):
    with pytest.raises(DataError):
        ph.letter_features("7", fs)


def test_letter_features_monotone(fs):
    base = ph.letter_features("b", fs)
    extended = ph.FeatureSystem(
        list(fs.phones.values()),
        {**fs.letter_candidates, "b": ("b", "m")},
    )
    assert ph.letter_features("b", extended) >= base


# ---------------------------------------------------------------------------
# Representation builders used across the tests
# ---------------------------------------------------------------------------


def word(orth, syls, **kw):
    return ph.Word(orthography=orth, syllables=syls, **kw)


def syl(phones, stress=1, nucleus=None, accent=False):
    if nucleus is None:
        nucleus = next(
            i for i, p in enumerate(phones) if p in ("aa", "ae", "ah", "ih", "iy", "eh")
        )
    return ph.Syllable(phones=list(phones), stress=stress, nucleus=nucleus,
                       pitch_accent=accent)


def one_sentence_rep(words):
    words[-1].break_index = 4
    return ph.LinguisticRep(
        sentences=[
            ph.Sentence(clauses=[ph.Clause(phrases=[ph.Phrase(words=words)])])
        ]
    )


def test_validate_ok(fs):
    rep = one_sentence_rep([word("cat", [syl(["k", "ae", "t"])])])
    assert ph.validate(rep, fs) == []


def test_validate_nucleus_out_of_range(fs):
    bad = ph.Syllable(phones=["k", "ae"], stress=1, nucleus=5)
    rep = one_sentence_rep([word("ka", [bad])])
    violations = ph.validate(rep, fs)
    assert any("nucleus" in v.message for v in violations)
    assert any("syllable[0]" in v.path for v in violations)


def test_validate_empty_syllable_named(fs):
    rep = one_sentence_rep([word("x", [ph.Syllable(phones=[], stress=0, nucleus=0)])])
    violations = ph.validate(rep, fs)
    assert any("no phones" in v.message for v in violations)


def test_validate_stress_range(fs):
    rep = one_sentence_rep([word("cat", [syl(["k", "ae", "t"], stress=3)])])
    assert any("stress" in v.message for v in ph.validate(rep, fs))


def test_validate_nesting_violation(fs):
    # Phrase boundary at sentence end without the clause-level break.
    w = word("cat", [syl(["k", "ae", "t"])])
    w.break_index = 3
    rep = ph.LinguisticRep(
        sentences=[ph.Sentence(clauses=[ph.Clause(phrases=[ph.Phrase(words=[w])])])]
    )
    violations = ph.validate(rep, fs)
    assert any("nesting" in v.message for v in violations)


def test_validate_unknown_phone(fs):
    rep = one_sentence_rep(
        [word("zz", [ph.Syllable(phones=["zz", "ae"], stress=1, nucleus=1)])]
    )
    assert any("unknown phone" in v.message for v in ph.validate(rep, fs))


# ---------------------------------------------------------------------------
# Boundary distances
# ---------------------------------------------------------------------------


def _naive_distances(flat):
    """Quadratic scan oracle."""
    n = len(flat)

    def scan(unit_of):
        prev = np.zeros(n, dtype=int)
        nxt = np.zeros(n, dtype=int)
        for i in range(n):
            d = 0
            j = i - 1
            while j >= 0 and unit_of[j] == unit_of[i]:
                d += 1
                j -= 1
            prev[i] = d
            d = 0
            j = i + 1
            while j < n and unit_of[j] == unit_of[i]:
                d += 1
                j += 1
            nxt[i] = d
        return prev, nxt

    return [scan(u) for u in (flat.word_of, flat.phrase_of, flat.clause_of,
                              flat.sentence_of)]


def _random_rep(rng):
    from nntts.corpus import _random_utterance

    return _random_utterance(rng)


def test_first_phone_abuts_all_opening_boundaries(fs):
    rep = one_sentence_rep([word("cat", [syl(["k", "ae", "t"])])])
    d = ph.boundary_distances(rep)
    for arr in (d.prev_word, d.prev_phrase, d.prev_clause, d.prev_sentence):
        assert arr[0] == 0


def test_last_phone_abuts_sentence_end(fs):
    rep = one_sentence_rep(
        [word("cat", [syl(["k", "ae", "t"])]), word("a", [syl(["ah"], nucleus=0)])]
    )
    d = ph.boundary_distances(rep)
    assert d.next_sentence[-1] == 0
    assert d.next_word[-1] == 0


def test_boundary_distances_match_naive_scan(fs):
    rng = np.random.default_rng(7)
    for _ in range(25):
        flat = ph.flatten(_random_rep(rng))
        d = ph.boundary_distances(flat)
        (pw, nw), (pp, np_), (pc, nc), (ps, ns) = _naive_distances(flat)
        np.testing.assert_array_equal(d.prev_word, pw)
        np.testing.assert_array_equal(d.next_word, nw)
        np.testing.assert_array_equal(d.prev_phrase, pp)
        np.testing.assert_array_equal(d.next_phrase, np_)
        np.testing.assert_array_equal(d.prev_clause, pc)
        np.testing.assert_array_equal(d.next_clause, nc)
        np.testing.assert_array_equal(d.prev_sentence, ps)
        np.testing.assert_array_equal(d.next_sentence, ns)


def test_coarser_boundary_never_closer(fs):
    rng = np.random.default_rng(8)
    for _ in range(25):
        d = ph.boundary_distances(ph.flatten(_random_rep(rng)))
        assert np.all(d.prev_phrase >= d.prev_word)
        assert np.all(d.prev_clause >= d.prev_phrase)
        assert np.all(d.prev_sentence >= d.prev_clause)
        assert np.all(d.next_phrase >= d.next_word)
        assert np.all(d.next_clause >= d.next_phrase)
        assert np.all(d.next_sentence >= d.next_clause)


# ---------------------------------------------------------------------------
# Syllabification
# ---------------------------------------------------------------------------


def test_naive_syllabify_simple(fs):
    syls = ph.naive_syllabify(["k", "ae", "t"], fs)
    assert len(syls) == 1
    assert syls[0].phones == ["k", "ae", "t"]
    assert syls[0].nucleus == 1
    assert syls[0].stress == 1


def test_naive_syllabify_two_vowels(fs):
    syls = ph.naive_syllabify(["b", "ae", "n", "ah"], fs)
    assert len(syls) == 2
    assert [s.phones for s in syls] == [["b", "ae"], ["n", "ah"]]
    assert [s.stress for s in syls] == [1, 0]


def test_naive_syllabify_no_vowel(fs):
    syls = ph.naive_syllabify(["s", "t"], fs)
    assert len(syls) == 1
    assert syls[0].nucleus == 1


def test_naive_syllabify_empty(fs):
    assert ph.naive_syllabify([], fs) == []


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_validate_accepts_generated_reps(seed):
    # Every generator rep must pass validation (downstream encoders rely on it).
    fs = ph.load_feature_system()
    rng = np.random.default_rng(seed)
    rep = _random_rep(rng)
    assert ph.validate(rep, fs) == []


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_valid_rep_accepted_by_every_encoder(seed):
    """validate(rep) == ok implies the postlex/duration/frame encoders run."""
    from nntts.acoustic import FrameEncoder
    from nntts.lingnets import encode_postlex_inputs
    from nntts.prosody import encode_duration_inputs

    fs = ph.load_feature_system()
    rng = np.random.default_rng(seed)
    rep = _random_rep(rng)
    assert ph.validate(rep, fs) == []
    flat, postlex_rows = encode_postlex_inputs(rep, fs)
    _, duration_rows = encode_duration_inputs(rep, fs)
    assert len(postlex_rows) == len(duration_rows) == len(flat)
    enc = FrameEncoder(rep, np.full(len(flat), 80.0), fs)
    assert enc.n_frames == round(len(flat) * 80.0 / 10.0)
    assert enc.row(0, []).shape[0] == enc.input_dim
