"""End-to-end synthesis: text -> tokens -> tags -> pronunciations ->
postlexical forms -> durations -> frames -> audio, with a per-stage trace.

Any stage failure is re-raised with the stage name prefixed so the CLI can
abort informatively.
"""

from __future__ import annotations

import json
from copy import deepcopy
from dataclasses import dataclass, field

from . import acoustic, lexicon as lx, lingnets, nn, prosody, vocoder
from .config import (
    load_config,
    load_duration_stats,
    load_g2p_classes,
)
from .corpus import assemble_sentence
from .errors import DataError, ModelError, NnttsError
from .phonology import (
    LinguisticRep,
    Word,
    load_feature_system,
    naive_syllabify,
    validate,
)

#: POS tags treated as content words, with their prominence.
_CONTENT_PROMINENCE = {
    "NN": 3, "NNS": 3, "NNP": 3, "CD": 3, "UH": 3,
    "VB": 2, "VBD": 2, "VBG": 2, "VBN": 2, "VBP": 2, "VBZ": 2,
    "JJ": 2, "JJR": 2, "JJS": 2, "RB": 2,
}


@dataclass
class SynthesisTrace:
    tokens: list = field(default_factory=list)
    tags: list = field(default_factory=list)
    lexical_prons: list = field(default_factory=list)
    pron_sources: list = field(default_factory=list)  # 'lexicon' | 'g2p'
    postlexical_prons: list = field(default_factory=list)
    durations_ms: list = field(default_factory=list)
    frame_count: int = 0
    audio_ms: float = 0.0

    def to_json(self):
        return json.dumps(
            {
                "tokens": self.tokens,
                "tags": self.tags,
                "lexical_prons": self.lexical_prons,
                "pron_sources": self.pron_sources,
                "postlexical_prons": self.postlexical_prons,
                "durations_ms": [round(d, 3) for d in self.durations_ms],
                "frame_count": self.frame_count,
                "audio_ms": self.audio_ms,
            },
            indent=2,
        )


def _stage(name):
    class _StageContext:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and isinstance(exc, NnttsError):
                raise type(exc)(f"[{name}] {exc}") from exc
            return False

    return _StageContext()


class Synthesizer:
    """Loads every model named by a PipelineConfig and runs the pipeline."""

    def __init__(self, cfg):
        if isinstance(cfg, str):
            cfg = load_config(cfg)
        self.cfg = cfg
        self.fs = load_feature_system(cfg.phones, cfg.letters)
        if cfg.lexicon is None:
            raise DataError("config does not name a lexicon")
        self.lexicon = lx.load_lexicon(cfg.lexicon, self.fs)
        if cfg.tagger is None:
            raise DataError("config does not name a tagger model")
        self.tagger = lx.load_tag_model(cfg.tagger)
        if cfg.g2p_weights is None or cfg.g2p_classes is None:
            raise DataError("config does not name g2p weights/classes")
        self.g2p_net = nn.load_weights(cfg.g2p_weights)
        self.g2p_alphabet = lingnets.G2PAlphabet(load_g2p_classes(cfg.g2p_classes))
        if len(self.g2p_alphabet) != self.g2p_net.output_size:
            raise ModelError(
                f"g2p classes ({len(self.g2p_alphabet)}) do not match net "
                f"outputs ({self.g2p_net.output_size})"
            )
        self.postlex_net = (
            nn.load_weights(cfg.postlex_weights) if cfg.postlex_weights else None
        )
        self.postlex_alphabet = lingnets.postlex_alphabet(self.fs)
        if cfg.duration_weights is None or cfg.duration_stats is None:
            raise DataError("config does not name duration weights/stats")
        self.duration_net = nn.load_weights(cfg.duration_weights)
        self.duration_stats = load_duration_stats(cfg.duration_stats)
        if cfg.acoustic_weights is None:
            raise DataError("config does not name acoustic weights")
        self.acoustic_net = nn.load_weights(cfg.acoustic_weights)
        self.vocoder_cfg = (
            vocoder.DEFAULT_CONFIG
            if cfg.sample_rate == vocoder.DEFAULT_CONFIG.sample_rate
            else vocoder.VocoderConfig(sample_rate=cfg.sample_rate)
        )

    # -- linguistic stage ---------------------------------------------------

    def build_rep(self, text, trace=None):
        with _stage("tokenize"):
            sentences = lx.tokenize(text)
        rep_sentences = []
        for sent_tokens in sentences:
            if trace is not None:
                trace.tokens.append(list(sent_tokens))
            word_tokens = [t for t in sent_tokens if t not in lx.PHRASE_BREAKS
                           and t not in ".!?"]
            with _stage("pos-tag"):
                tags = lx.pos_tag(word_tokens, self.tagger)
            if trace is not None:
                trace.tags.append(list(tags))
            words = []
            ti = iter(zip(word_tokens, tags))
            with _stage("pronounce"):
                for token in sent_tokens:
                    if token in ".!?":
                        if words:
                            words[-1].break_index = 4
                        continue
                    if token in lx.PHRASE_BREAKS:
                        if words:
                            words[-1].break_index = max(words[-1].break_index, 3)
                        continue
                    tok, tag = next(ti)
                    variant = lx.lookup(tok, tag, self.lexicon)
                    if variant is not None:
                        syllables = deepcopy(variant.syllables)
                        source = "lexicon"
                    else:
                        phones = lingnets.g2p_predict(
                            tok, self.g2p_net, self.fs, self.g2p_alphabet
                        )
                        syllables = naive_syllabify(phones, self.fs)
                        source = "g2p"
                    if trace is not None:
                        trace.lexical_prons.append(
                            [p for s in syllables for p in s.phones]
                        )
                        trace.pron_sources.append(source)
                    prominence = _CONTENT_PROMINENCE.get(tag)
                    is_content = prominence is not None
                    for syl in syllables:
                        if syl.stress == 1 and is_content and prominence >= 3:
                            syl.pitch_accent = True
                    words.append(
                        Word(
                            orthography=tok,
                            syllables=syllables,
                            pos=tag,
                            is_content=is_content,
                            prominence=prominence if is_content else 1,
                        )
                    )
            if words:
                rep_sentences.append(assemble_sentence(words))
        if not rep_sentences:
            raise DataError("no words to synthesize")
        rep = LinguisticRep(sentences=rep_sentences)
        violations = validate(rep, self.fs)
        if violations:
            raise ModelError(
                "[linguistic] invalid representation: "
                + "; ".join(str(v) for v in violations[:5])
            )
        return rep

    # -- full pipeline ------------------------------------------------------

    def say(self, text, want_trace=False):
        """Text to AudioBuffer; optionally returns the per-stage trace."""
        trace = SynthesisTrace() if want_trace else None
        rep = self.build_rep(text, trace)
        if self.postlex_net is not None:
            with _stage("postlex"):
                prons = lingnets.postlex_predict(
                    rep, self.postlex_net, self.fs, self.postlex_alphabet
                )
                rep = lingnets.apply_postlex(rep, prons, self.fs)
                if trace is not None:
                    trace.postlexical_prons = prons
        elif trace is not None:
            trace.postlexical_prons = [
                [p for s in w.syllables for p in s.phones]
                for sent in rep.sentences
                for c in sent.clauses
                for ph in c.phrases
                for w in ph.words
            ]
        with _stage("duration"):
            durations = prosody.predict_durations(
                rep,
                self.duration_net,
                self.duration_stats,
                self.fs,
                mode=self.cfg.duration_mode,
            )
        with _stage("acoustic"):
            frames = acoustic.generate_frames(
                rep, durations, self.acoustic_net, self.fs, self.vocoder_cfg
            )
        with _stage("vocoder"):
            audio = vocoder.synthesize(frames, self.vocoder_cfg, seed=self.cfg.seed)
        if trace is not None:
            trace.durations_ms = [float(d) for d in durations]
            trace.frame_count = len(frames)
            trace.audio_ms = len(audio) * 1000.0 / audio.sample_rate
            return audio, trace
        return audio

    def synthesize_frames(self, frames):
        """Copy-synthesis entry point: frames straight to the vocoder."""
        with _stage("vocoder"):
            return vocoder.synthesize(frames, self.vocoder_cfg, seed=self.cfg.seed)
