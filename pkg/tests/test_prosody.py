import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nntts import corpus as cp, nn, prosody as pr
from nntts.errors import DataError
from nntts.phonology import Phrase, Clause, LinguisticRep, Sentence, Syllable, Word, flatten


def test_phone_stats_hand_case():
    stats = pr.phone_stats([("t", 80.0), ("t", 120.0), ("k", 50.0)])
    assert stats.mean("t") == pytest.approx(100.0)
    assert stats.std("t") == pytest.approx(28.284271, rel=1e-6)
    assert stats.counts["t"] == 2


def test_phone_stats_constant_duration_uses_global_std():
    stats = pr.phone_stats([("t", 100.0)] * 3 + [("k", 50.0), ("k", 150.0)])
    assert stats.mean("t") == pytest.approx(100.0)
    assert stats.std("t") == stats.global_std
    assert stats.global_std > 0


def test_phone_stats_unseen_phone_falls_back_to_global():
    stats = pr.phone_stats([("t", 80.0), ("t", 120.0)])
    assert stats.mean("zz") == stats.global_mean
    assert stats.std("zz") == stats.global_std


def test_phone_stats_empty_rejected():
    with pytest.raises(DataError):
        pr.phone_stats([])


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------


def test_log_transform():
    assert pr.to_log(100.0) == pytest.approx(np.log(100.0))
    assert pr.from_log(pr.to_log(123.4)) == pytest.approx(123.4, rel=1e-9)


def test_log_rejects_nonpositive():
    with pytest.raises(DataError):
        pr.to_log(0.0)
    with pytest.raises(DataError):
        pr.to_log(-5.0)


def test_zscore_transform():
    stats = pr.phone_stats([("t", 80.0), ("t", 120.0)])
    assert pr.to_zscore(100.0, "t", stats) == pytest.approx(0.0)
    assert pr.to_zscore(100.0 + stats.std("t"), "t", stats) == pytest.approx(1.0)
    assert pr.from_zscore(1.0, "t", stats) == pytest.approx(100.0 + stats.std("t"))


def test_zscore_floor():
    stats = pr.phone_stats([("t", 80.0), ("t", 120.0)])
    assert pr.from_zscore(-10.0, "t", stats) == pr.MIN_DURATION_MS


def test_log_floor():
    assert pr.from_log(-5.0) == pr.MIN_DURATION_MS


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=21.0, max_value=2000.0))
def test_round_trips_above_floor(ms):
    stats = pr.phone_stats([("t", 80.0), ("t", 120.0)])
    assert pr.from_log(pr.to_log(ms)) == pytest.approx(ms, rel=1e-9)
    assert pr.from_zscore(pr.to_zscore(ms, "t", stats), "t", stats) == pytest.approx(
        ms, rel=1e-9
    )


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------


def _two_word_rep():
    w1 = Word(
        orthography="data",
        syllables=[
            Syllable(phones=["d", "ey"], stress=1, nucleus=1, pitch_accent=True),
            Syllable(phones=["t", "ah"], stress=0, nucleus=1),
        ],
        pos="NN",
        is_content=True,
        prominence=3,
        break_index=1,
    )
    w2 = Word(
        orthography="point",
        syllables=[Syllable(phones=["p", "oy", "n", "t"], stress=1, nucleus=1)],
        pos="NN",
        is_content=True,
        prominence=3,
        break_index=4,
    )
    return LinguisticRep(
        sentences=[Sentence(clauses=[Clause(phrases=[Phrase(words=[w1, w2])])])]
    )


def test_nucleus_offset_zero_on_nucleus(fs):
    rep = _two_word_rep()
    flat, rows = pr.encode_duration_inputs(rep, fs)
    base = 5 * pr.duration_slot_dim(fs)
    # Phone 1 is the first syllable's nucleus.
    assert rows[1][base] == 0.0
    # Phone 0 sits one before the nucleus.
    assert rows[0][base] == pytest.approx(-1.0 / 3.0)


def test_rule_bits_for_final_syllable(fs):
    rep = _two_word_rep()
    flat = flatten(rep)
    last = len(flat) - 1
    bits = pr.rule_condition_vector(flat, last)
    names = dict(zip(pr.RULE_CONDITIONS, bits))
    assert names["phrase_final_syllable"] == 1.0
    assert names["clause_final_syllable"] == 1.0
    assert names["pre_pausal"] == 1.0
    assert names["unstressed_syllable"] == 0.0
    assert names["polysyllabic_word"] == 0.0
    assert names["is_nucleus"] == 0.0


def test_rule_bits_second_syllable_unstressed(fs):
    rep = _two_word_rep()
    flat = flatten(rep)
    bits = pr.rule_condition_vector(flat, 3)  # 'ah' of the second syllable
    names = dict(zip(pr.RULE_CONDITIONS, bits))
    assert names["unstressed_syllable"] == 1.0
    assert names["is_nucleus"] == 1.0
    assert names["polysyllabic_word"] == 1.0
    assert names["pitch_accented_syllable"] == 0.0


def test_hand_encoded_fixture(fs):
    """Full vector for one phone of a hand-built rep, checked field by field."""
    rep = _two_word_rep()
    flat, rows = pr.encode_duration_inputs(rep, fs)
    i = 1  # 'ey': stressed nucleus, accented, word-initial syllable
    slot_dim = pr.duration_slot_dim(fs)
    row = rows[i]
    assert len(row) == pr.duration_input_dim(fs)
    center = row[2 * slot_dim : 3 * slot_dim]
    nv, nf = len(fs.symbols), len(fs.feature_names)
    onehot = np.zeros(nv)
    onehot[fs.phone_index("ey")] = 1
    np.testing.assert_array_equal(center[:nv], onehot)
    np.testing.assert_array_equal(center[nv : nv + nf], fs.feature_vector("ey"))
    stress = center[nv + nf : nv + nf + 3]
    np.testing.assert_array_equal(stress, [0, 1, 0])
    assert center[nv + nf + 3] == 1.0  # content word
    flags = center[nv + nf + 4 : nv + nf + 12]
    # 'ey' is phone 1 of 8: not at any start/end boundary.
    np.testing.assert_array_equal(flags, np.zeros(8))
    # Scalars: nucleus offset 0; rule bits: accented + polysyllabic only.
    base = 5 * slot_dim
    assert row[base] == 0.0
    bits = row[base + 3 :]
    names = dict(zip(pr.RULE_CONDITIONS, bits))
    assert names["pitch_accented_syllable"] == 1.0
    assert names["polysyllabic_word"] == 1.0
    assert names["phrase_final_syllable"] == 0.0


def test_encoding_dim_constant_across_phones(fs):
    rng = np.random.default_rng(4)
    dims = set()
    for _ in range(5):
        rep = cp._random_utterance(rng)
        _, rows = pr.encode_duration_inputs(rep, fs)
        dims.add(rows.shape[1])
    assert dims == {pr.duration_input_dim(fs)}


def test_encode_single_index_matches_batch(fs):
    rep = _two_word_rep()
    _, rows = pr.encode_duration_inputs(rep, fs)
    np.testing.assert_array_equal(pr.encode_duration_input(rep, 3, fs), rows[3])


def test_encode_index_out_of_range(fs):
    with pytest.raises(DataError, match="out of range"):
        pr.encode_duration_input(_two_word_rep(), 99, fs)


# ---------------------------------------------------------------------------
# Prediction
# ---------------------------------------------------------------------------


def test_predict_constant_duration_corpus(fs):
    # Degenerate task: every phone lasts 90 ms; the net must say 90.
    corpus = [(rep, [90.0] * len(flatten(rep))) for rep, _ in
              [(cp._random_utterance(np.random.default_rng(s)), None) for s in range(25)]]
    pairs = []
    xs, ts = [], []
    for rep, durs in corpus:
        flat, rows = pr.encode_duration_inputs(rep, fs)
        pairs.extend(zip(flat.symbols, durs))
        xs.append(rows)
        ts.extend([[pr.to_log(d)] for d in durs])
    stats = pr.phone_stats(pairs)
    xs = np.vstack(xs)
    net = nn.init_network([xs.shape[1], 16, 1], seed=0)
    cfg = nn.TrainConfig(learning_rate=0.05, momentum=0.9, epochs=60,
                         batch_size=32, seed=0)
    trained, _ = nn.train(net, xs, np.array(ts), cfg)
    rep = corpus[0][0]
    pred = pr.predict_durations(rep, trained, stats, fs, mode="log")
    assert np.all(np.abs(pred - 90.0) < 1.0)


def test_predictions_respect_floor(fs):
    rep = _two_word_rep()
    stats = pr.phone_stats([("t", 80.0), ("t", 120.0)])
    net = nn.init_network([pr.duration_input_dim(fs), 4, 1], seed=1)
    net.biases[-1][:] = -100.0  # force absurdly small raw outputs
    pred = pr.predict_durations(rep, net, stats, fs, mode="zscore")
    assert np.all(pred >= pr.MIN_DURATION_MS)


def test_predict_unknown_mode(fs):
    rep = _two_word_rep()
    stats = pr.phone_stats([("t", 80.0)])
    net = nn.init_network([pr.duration_input_dim(fs), 4, 1], seed=1)
    with pytest.raises(DataError, match="mode"):
        pr.predict_durations(rep, net, stats, fs, mode="linear")
