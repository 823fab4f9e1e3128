import os

import pytest

from nntts.phonology import load_feature_system


@pytest.fixture(scope="session")
def fs():
    return load_feature_system()


def _data_path(name):
    from importlib import resources

    return str(resources.files("nntts.data") / name)


@pytest.fixture(scope="session")
def demo_lexicon_path():
    return _data_path("lexicon_demo.tsv")


@pytest.fixture(scope="session")
def tagged_demo_path():
    return _data_path("tagged_demo.txt")


def run_cli(*args):
    """Run the CLI in-process; returns (exit_code, stdout)."""
    import io
    from contextlib import redirect_stdout

    from nntts.cli import main

    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(list(args))
    return code, buf.getvalue()


def build_bundle(root, seed=0, flapping_size=700, duration_size=350,
                 vowel_size=24, epochs=None):
    """Generate corpora, train every stage, and write a pipeline config.

    Returns the config path. `epochs`, when given, overrides every stage's
    budget (used by the fast determinism checks).
    """
    os.makedirs(root, exist_ok=True)
    lex = _data_path("lexicon_demo.tsv")
    tagged = _data_path("tagged_demo.txt")
    ep = ["--epochs", str(epochs)] if epochs else []

    def cli(*args):
        code, out = run_cli(*args)
        assert code == 0, f"cli {' '.join(map(str, args))} failed:\n{out}"

    cli("gen-corpus", "flapping", "--out", root, "--seed", str(seed),
        "--size", str(flapping_size))
    cli("gen-corpus", "durations", "--out", root, "--seed", str(seed),
        "--size", str(duration_size))
    cli("gen-corpus", "vowels", "--out", os.path.join(root, "vowels"),
        "--seed", str(seed), "--size", str(vowel_size))
    cli("train", "tagger", "--corpus", tagged,
        "--out", os.path.join(root, "tagger.json"))
    cli("train", "g2p", "--corpus", lex, "--seed", str(seed),
        "--out", os.path.join(root, "g2p.nnw"), *ep)
    cli("train", "postlex", "--corpus", os.path.join(root, "flapping_train.jsonl"),
        "--heldout", os.path.join(root, "flapping_heldout.jsonl"),
        "--seed", str(seed), "--out", os.path.join(root, "postlex.nnw"), *ep)
    cli("train", "duration", "--corpus", os.path.join(root, "durations_train.jsonl"),
        "--heldout", os.path.join(root, "durations_heldout.jsonl"),
        "--seed", str(seed), "--out", os.path.join(root, "duration.nnw"), *ep)
    cli("train", "acoustic", "--corpus", os.path.join(root, "vowels", "vowels.jsonl"),
        "--seed", str(seed), "--out", os.path.join(root, "acoustic.nnw"), *ep)

    config_path = os.path.join(root, "config.cfg")
    with open(config_path, "w", encoding="utf-8") as f:
        f.write(
            "\n".join(
                [
                    f"lexicon = {lex}",
                    f"tagger = {os.path.join(root, 'tagger.json')}",
                    f"g2p_weights = {os.path.join(root, 'g2p.nnw')}",
                    f"g2p_classes = {os.path.join(root, 'g2p.nnw.classes.json')}",
                    f"postlex_weights = {os.path.join(root, 'postlex.nnw')}",
                    f"duration_weights = {os.path.join(root, 'duration.nnw')}",
                    f"duration_stats = {os.path.join(root, 'duration.nnw.stats.json')}",
                    f"acoustic_weights = {os.path.join(root, 'acoustic.nnw')}",
                    "duration_mode = zscore",
                    "seed = 0",
                ]
            )
            + "\n"
        )
    return config_path


@pytest.fixture(scope="session")
def bundle(tmp_path_factory):
    """Fully trained model bundle shared by the end-to-end tests."""
    root = tmp_path_factory.mktemp("bundle")
    config_path = build_bundle(str(root))
    return {"root": str(root), "config": config_path}


@pytest.fixture(scope="session")
def synthesizer(bundle):
    from nntts.pipeline import Synthesizer

    return Synthesizer(bundle["config"])
