"""Command-line front end.

Verbs: train, say, analyze, synth, gen-corpus, bench, align-test.
Exit codes: 0 success, 1 usage, 2 data error, 3 model error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__, acoustic, lingnets, nn, prosody, vocoder
from . import corpus as corpus_mod
from . import lexicon as lx
from .align import align, brute_force_align, CostModel
from .config import save_duration_stats, save_g2p_classes
from .errors import DataError, ModelError
from .phonology import flatten, load_feature_system
from .pipeline import Synthesizer

#: Documented default training budgets, tuned on the synthetic corpora.
STAGE_DEFAULTS = {
    "g2p": dict(hidden=128, epochs=120, learning_rate=0.3, batch_size=32),
    "postlex": dict(hidden=64, epochs=60, learning_rate=0.3, batch_size=32),
    "duration": dict(hidden=48, epochs=60, learning_rate=0.05, batch_size=32),
    "acoustic": dict(hidden=64, epochs=300, learning_rate=0.05, batch_size=16),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _train_config(args, defaults):
    return nn.TrainConfig(
        learning_rate=args.lr if args.lr is not None else defaults["learning_rate"],
        momentum=0.9,
        epochs=args.epochs if args.epochs is not None else defaults["epochs"],
        batch_size=defaults["batch_size"],
        seed=args.seed,
    )


def _hidden(args, defaults):
    return args.hidden if args.hidden is not None else defaults["hidden"]


def _write_metrics(path, metrics):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(metrics, f, indent=2, sort_keys=True)
    print(f"metrics -> {path}")
    for k, v in sorted(metrics.items()):
        print(f"  {k}: {v}")


def _classification_metrics(net, dataset, alphabet):
    ys = nn.forward_batch(net, dataset.inputs)
    pred = np.argmax(ys, axis=1)
    ref = np.argmax(dataset.targets, axis=1)
    return float(np.mean(pred == ref)), [alphabet.classes[i] for i in pred]


def _load_fs(args):
    return load_feature_system(getattr(args, "phones", None), getattr(args, "letters", None))


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------


def cmd_train(args):
    fs = _load_fs(args)
    if args.stage == "tagger":
        sentences = lx.load_tagged_corpus(args.corpus)
        model = lx.train_tagger(sentences)
        lx.save_tag_model(model, args.out)
        _write_metrics(
            args.out + ".metrics.json",
            {"sentences": len(sentences), "tags": len(model.tags),
             "vocabulary": len(model.vocabulary)},
        )
        return 0

    defaults = STAGE_DEFAULTS[args.stage]
    cfg = _train_config(args, defaults)
    hidden = _hidden(args, defaults)

    if args.stage == "g2p":
        lex = lx.load_lexicon(args.corpus, fs)
        ds = lingnets.build_g2p_dataset(lex, fs)
        net = nn.init_network(
            [ds.inputs.shape[1], hidden, len(ds.alphabet)],
            output_activation="softmax",
            seed=cfg.seed,
        )
        trained, curve = nn.train(net, ds.inputs, ds.targets, cfg)
        nn.save_weights(trained, args.out)
        classes_path = args.classes_out or args.out + ".classes.json"
        save_g2p_classes(ds.alphabet.classes, classes_path)
        acc, _ = _classification_metrics(trained, ds, ds.alphabet)
        _write_metrics(
            args.out + ".metrics.json",
            {
                "train_accuracy": acc,
                "final_loss": curve[-1],
                "samples": len(ds.inputs),
                "words": ds.n_words,
                "skipped_words": len(ds.skipped),
                "classes": len(ds.alphabet),
            },
        )
        return 0

    if args.stage == "postlex":
        train_corpus = _postlex_corpus(args.corpus)
        ds = lingnets.build_postlex_dataset(train_corpus, fs)
        net = nn.init_network(
            [ds.inputs.shape[1], hidden, len(ds.alphabet)],
            output_activation="softmax",
            seed=cfg.seed,
        )
        trained, curve = nn.train(net, ds.inputs, ds.targets, cfg)
        nn.save_weights(trained, args.out)
        acc, _ = _classification_metrics(trained, ds, ds.alphabet)
        metrics = {
            "train_accuracy": acc,
            "final_loss": curve[-1],
            "samples": len(ds.inputs),
            "skipped_words": ds.skipped,
        }
        if args.heldout:
            hd = lingnets.build_postlex_dataset(_postlex_corpus(args.heldout), fs)
            _, pred = _classification_metrics(trained, hd, hd.alphabet)
            ref = [hd.alphabet.classes[i] for i in np.argmax(hd.targets, axis=1)]
            m = lingnets.postlex_metrics(pred, ref, hd.center_phones)
            metrics["heldout_accuracy"] = m["accuracy"] / 100.0
            metrics["heldout_identity_baseline"] = m["identity_baseline"] / 100.0
        _write_metrics(args.out + ".metrics.json", metrics)
        return 0

    if args.stage == "duration":
        mode = args.mode
        train_corpus = _duration_corpus(args.corpus)
        pairs = []
        for rep, durs in train_corpus:
            flat = flatten(rep)
            pairs.extend(zip(flat.symbols, durs))
        stats = prosody.phone_stats(pairs)
        xs, targets = _duration_dataset(train_corpus, fs, stats, mode)
        net = nn.init_network([xs.shape[1], hidden, 1], seed=cfg.seed)
        trained, curve = nn.train(net, xs, targets, cfg)
        nn.save_weights(trained, args.out)
        stats_path = args.stats_out or args.out + ".stats.json"
        save_duration_stats(stats, stats_path)
        metrics = {"final_loss": curve[-1], "samples": len(xs), "mode": mode}
        eval_corpus = _duration_corpus(args.heldout) if args.heldout else train_corpus
        mae, baseline = _duration_mae(eval_corpus, trained, stats, fs, mode)
        key = "heldout" if args.heldout else "train"
        metrics[f"{key}_mae_ms"] = mae
        metrics[f"{key}_baseline_mae_ms"] = baseline
        _write_metrics(args.out + ".metrics.json", metrics)
        return 0

    if args.stage == "acoustic":
        xs, ts = _acoustic_dataset(args.corpus, fs)
        net = nn.init_network(
            [xs.shape[1], hidden, ts.shape[1]],
            feedback=acoustic.FEEDBACK_K,
            seed=cfg.seed,
        )
        trained, curve = nn.train(net, xs, ts, cfg)
        nn.save_weights(trained, args.out)
        if args.cache:
            acoustic.save_frame_dataset(xs, ts, args.cache)
        _write_metrics(
            args.out + ".metrics.json",
            {"final_mse": curve[-1], "frames": len(xs)},
        )
        return 0

    raise ModelError(f"unknown stage {args.stage!r}")


def _postlex_corpus(path):
    out = []
    for rep, postlex, _, _ in corpus_mod.read_corpus(path):
        if postlex is None:
            raise DataError(f"{path}: utterance lacks postlexical pronunciations")
        out.append((rep, postlex))
    return out


def _duration_corpus(path):
    out = []
    for rep, _, durations, _ in corpus_mod.read_corpus(path):
        if durations is None:
            raise DataError(f"{path}: utterance lacks durations")
        out.append((rep, durations))
    return out


def _duration_dataset(corpus, fs, stats, mode):
    xs = []
    targets = []
    for rep, durs in corpus:
        flat, rows = prosody.encode_duration_inputs(rep, fs)
        xs.append(rows)
        for sym, d in zip(flat.symbols, durs):
            t = prosody.to_log(d) if mode == "log" else prosody.to_zscore(d, sym, stats)
            targets.append([t])
    return np.vstack(xs), np.array(targets)


def _duration_mae(corpus, net, stats, fs, mode):
    errs = []
    base = []
    for rep, durs in corpus:
        pred = prosody.predict_durations(rep, net, stats, fs, mode)
        flat = flatten(rep)
        for sym, d, p in zip(flat.symbols, durs, pred):
            errs.append(abs(p - d))
            base.append(abs(stats.mean(sym) - d))
    return float(np.mean(errs)), float(np.mean(base))


def _acoustic_dataset(path, fs):
    base = os.path.dirname(os.path.abspath(path))
    xs, ts = [], []
    for rep, _, durations, wav in corpus_mod.read_corpus(path):
        if durations is None or wav is None:
            raise DataError(f"{path}: utterance lacks durations or a wav path")
        wav_path = wav if os.path.isabs(wav) else os.path.join(base, wav)
        audio = vocoder.read_wav(wav_path)
        x, t = acoustic.build_frame_dataset(audio, rep, durations, fs)
        xs.append(x)
        ts.append(t)
    if not xs:
        raise DataError(f"{path}: empty corpus")
    return np.vstack(xs), np.vstack(ts)


# ---------------------------------------------------------------------------
# say / analyze / synth
# ---------------------------------------------------------------------------


def cmd_say(args):
    synth = Synthesizer(args.config)
    if args.seed is not None:
        synth.cfg.seed = args.seed
    if args.copy_frames:
        frames = vocoder.load_frame_dump(args.copy_frames, synth.vocoder_cfg)
        audio = synth.synthesize_frames(frames)
        vocoder.write_wav(audio, args.out)
        print(f"{args.out}: {len(audio)} samples ({audio.duration:.2f}s) from "
              f"{len(frames)} dumped frames")
        return 0
    audio, trace = synth.say(args.text, want_trace=True)
    vocoder.write_wav(audio, args.out)
    print(f"{args.out}: {len(audio)} samples ({audio.duration:.2f}s), "
          f"{trace.frame_count} frames")
    if args.trace:
        if args.trace == "-":
            print(trace.to_json())
        else:
            with open(args.trace, "w", encoding="utf-8") as f:
                f.write(trace.to_json() + "\n")
            print(f"trace -> {args.trace}")
    return 0


def cmd_analyze(args):
    audio = vocoder.read_wav(args.wav)
    cfg = vocoder.DEFAULT_CONFIG
    if audio.sample_rate != cfg.sample_rate:
        cfg = vocoder.VocoderConfig(sample_rate=audio.sample_rate)
    frames = vocoder.analyze(audio, cfg)
    vocoder.dump_frames(frames, args.out)
    print(f"{args.out}: {len(frames)} frames")
    return 0


def cmd_synth(args):
    frames = vocoder.load_frame_dump(args.frames)
    audio = vocoder.synthesize(frames, seed=args.seed)
    vocoder.write_wav(audio, args.out)
    print(f"{args.out}: {len(audio)} samples ({audio.duration:.2f}s)")
    return 0


# ---------------------------------------------------------------------------
# gen-corpus
# ---------------------------------------------------------------------------


def cmd_gen_corpus(args):
    fs = _load_fs(args)
    os.makedirs(args.out, exist_ok=True)
    if args.kind == "flapping":
        size = args.size or 700
        held = max(size // 6, 20)
        train = corpus_mod.gen_flapping_corpus(fs, seed=args.seed, size=size)
        heldout = corpus_mod.gen_flapping_corpus(fs, seed=args.seed + 1, size=held)
        for name, data in (("train", train), ("heldout", heldout)):
            path = os.path.join(args.out, f"flapping_{name}.jsonl")
            corpus_mod.write_corpus(
                path, ((rep, postlex, None, None) for rep, postlex in data)
            )
            print(f"{path}: {len(data)} utterances")
        rate = corpus_mod.identity_rate(train, fs)
        print(f"identity rate: {rate:.3f}")
        return 0
    if args.kind == "durations":
        size = args.size or 350
        held = max(size // 6, 20)
        train = corpus_mod.gen_duration_corpus(fs, seed=args.seed, size=size)
        heldout = corpus_mod.gen_duration_corpus(fs, seed=args.seed + 1, size=held)
        for name, data in (("train", train), ("heldout", heldout)):
            path = os.path.join(args.out, f"durations_{name}.jsonl")
            corpus_mod.write_corpus(
                path, ((rep, None, durs, None) for rep, durs in data)
            )
            print(f"{path}: {len(data)} utterances")
        return 0
    if args.kind == "vowels":
        size = args.size or 24
        manifest = corpus_mod.gen_vowel_corpus(fs, args.out, seed=args.seed, size=size)
        path = os.path.join(args.out, "vowels.jsonl")
        corpus_mod.write_corpus(
            path,
            (
                (rep, None, durs, os.path.basename(wav))
                for rep, durs, wav in manifest
            ),
        )
        print(f"{path}: {len(manifest)} utterances")
        return 0
    raise DataError(f"unknown corpus kind {args.kind!r}")


# ---------------------------------------------------------------------------
# bench / align-test
# ---------------------------------------------------------------------------


def cmd_bench(args):
    with open(args.text, encoding="utf-8") as f:
        lines = [line.strip() for line in f if line.strip()]
    if not lines:
        print("no text; nothing to benchmark")
        return 0
    synth = Synthesizer(args.config)
    synth.say(lines[0])  # warm-up: triggers kernel compilation
    total_audio = 0.0
    total_time = 0.0
    for _ in range(args.runs):
        for line in lines:
            t0 = time.perf_counter()
            audio = synth.say(line)
            total_time += time.perf_counter() - t0
            total_audio += audio.duration
    rtf = total_time / total_audio if total_audio > 0 else float("inf")
    print(f"sentences: {len(lines)} x {args.runs} runs")
    print(f"audio: {total_audio:.2f}s  synthesis: {total_time:.2f}s")
    print(f"real-time factor: {rtf:.4f}")
    return 0


def cmd_align_test(args):
    rng = np.random.default_rng(args.seed)
    symbols = list("abcdefgh")
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(args.pairs):
        table = {
            (x, y): (0.0 if x == y else float(rng.uniform(0.0, 2.0)))
            for x in symbols
            for y in symbols
        }
        cm = CostModel(
            substitution_cost=lambda x, y, t=table: t[(x, y)],
            insertion_cost=float(rng.uniform(0.0, 2.0)),
            deletion_cost=float(rng.uniform(0.0, 2.0)),
        )
        a = [symbols[i] for i in rng.integers(0, len(symbols), rng.integers(0, 7))]
        b = [symbols[i] for i in rng.integers(0, len(symbols), rng.integers(0, 7))]
        got = align(a, b, cm).total_cost
        want = brute_force_align(a, b, cm).total_cost
        worst = max(worst, abs(got - want))
    dt = time.perf_counter() - t0
    print(f"{args.pairs} random pairs in {dt:.2f}s; max |dp - brute force| = {worst}")
    if worst != 0.0:
        print("FAIL: dynamic program is not optimal")
        return 3
    print("PASS")
    return 0


# ---------------------------------------------------------------------------


def build_parser():
    parser = _Parser(prog="nntts", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one pipeline stage", parents=[])
    p.add_argument("stage", choices=["g2p", "postlex", "duration", "acoustic", "tagger"])
    p.add_argument("--corpus", required=True, help="stage corpus file")
    p.add_argument("--out", required=True, help="output weight/model file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--hidden", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--heldout", help="held-out corpus for metrics")
    p.add_argument("--mode", choices=["log", "zscore"], default="zscore",
                   help="duration target transform")
    p.add_argument("--stats-out", help="duration stats output path")
    p.add_argument("--classes-out", help="g2p class list output path")
    p.add_argument("--cache", help="acoustic frame-dataset cache output path")
    p.add_argument("--phones", help="phone inventory TSV override")
    p.add_argument("--letters", help="letter table TSV override")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("say", help="synthesize text to a WAV file")
    p.add_argument("text")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None,
                   help="override the config's synthesis noise seed")
    p.add_argument("--trace", nargs="?", const="-",
                   help="write the per-stage trace JSON here ('-' = stdout)")
    p.add_argument("--copy-frames", help="bypass the nets: synthesize this frame dump")
    p.set_defaults(func=cmd_say)

    p = sub.add_parser("analyze", help="WAV to frame-parameter dump")
    p.add_argument("wav")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synth", help="frame-parameter dump to WAV")
    p.add_argument("frames")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("gen-corpus", help="generate a synthetic training corpus")
    p.add_argument("kind", choices=["flapping", "durations", "vowels"])
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--phones", help="phone inventory TSV override")
    p.add_argument("--letters", help="letter table TSV override")
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("bench", help="report the synthesis real-time factor")
    p.add_argument("--config", required=True)
    p.add_argument("--text", required=True, help="benchmark text, one utterance per line")
    p.add_argument("--runs", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("align-test", help="alignment optimality self-check")
    p.add_argument("--pairs", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_align_test)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as e:
        print(f"nntts: data error: {e}", file=sys.stderr)
        return 2
    except ModelError as e:
        print(f"nntts: model error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
