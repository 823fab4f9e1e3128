"""Pipeline configuration: one human-readable key = value file that names
every model artifact a synthesis run needs.

Recognized keys (paths resolve relative to the config file):

    phones, letters        phone inventory / letter table TSVs (default: shipped)
    lexicon                pronunciation lexicon TSV
    tagger                 POS tagger model JSON
    g2p_weights            letter-to-sound network weight file
    g2p_classes            letter-to-sound output classes JSON
    postlex_weights        postlexical network weight file (optional stage)
    duration_weights       duration network weight file
    duration_stats         per-phone duration statistics JSON
    duration_mode          log | zscore (default zscore)
    acoustic_weights       phonetic network weight file
    sample_rate            vocoder sample rate (default 16000)
    seed                   synthesis noise seed (default 0)

Blank lines and '#' comments are ignored. Every referenced file must exist
at load time.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields

from .errors import DataError

_PATH_KEYS = (
    "phones",
    "letters",
    "lexicon",
    "tagger",
    "g2p_weights",
    "g2p_classes",
    "postlex_weights",
    "duration_weights",
    "duration_stats",
    "acoustic_weights",
)


@dataclass
class PipelineConfig:
    phones: str = None
    letters: str = None
    lexicon: str = None
    tagger: str = None
    g2p_weights: str = None
    g2p_classes: str = None
    postlex_weights: str = None
    duration_weights: str = None
    duration_stats: str = None
    acoustic_weights: str = None
    duration_mode: str = "zscore"
    sample_rate: int = 16000
    seed: int = 0


def load_config(path):
    known = {f.name for f in fields(PipelineConfig)}
    cfg = PipelineConfig()
    base = os.path.dirname(os.path.abspath(path))
    try:
        f = open(path, encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot read config: {e}") from e
    with f:
        for lineno, raw in enumerate(f, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in known:
                raise DataError(f"{path}:{lineno}: unknown config key {key!r}")
            if key in _PATH_KEYS:
                value = os.path.normpath(os.path.join(base, value))
            elif key in ("sample_rate", "seed"):
                try:
                    value = int(value)
                except ValueError:
                    raise DataError(f"{path}:{lineno}: {key} must be an integer") from None
            elif key == "duration_mode" and value not in ("log", "zscore"):
                raise DataError(f"{path}:{lineno}: duration_mode must be log or zscore")
            setattr(cfg, key, value)
    for key in _PATH_KEYS:
        value = getattr(cfg, key)
        if value is not None and not os.path.exists(value):
            raise DataError(f"{path}: {key} file does not exist: {value}")
    return cfg


def save_config(cfg, path):
    base = os.path.dirname(os.path.abspath(path))
    lines = []
    for f in fields(PipelineConfig):
        value = getattr(cfg, f.name)
        if value is None:
            continue
        if f.name in _PATH_KEYS:
            value = os.path.relpath(value, base)
        lines.append(f"{f.name} = {value}")
    with open(path, "w", encoding="utf-8") as out:
        out.write("\n".join(lines) + "\n")


def save_g2p_classes(classes, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(list(classes), f)


def load_g2p_classes(path):
    try:
        with open(path, encoding="utf-8") as f:
            classes = json.load(f)
        if not isinstance(classes, list) or not all(isinstance(c, str) for c in classes):
            raise DataError(f"{path}: expected a JSON list of class names")
        return tuple(classes)
    except json.JSONDecodeError as e:
        raise DataError(f"{path}: bad JSON: {e}") from e


def save_duration_stats(stats, path):
    doc = {
        "means": dict(sorted(stats.means.items())),
        "stds": dict(sorted(stats.stds.items())),
        "counts": dict(sorted(stats.counts.items())),
        "global_mean": stats.global_mean,
        "global_std": stats.global_std,
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, sort_keys=True)


def load_duration_stats(path):
    from .prosody import DurationStats

    try:
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
        return DurationStats(
            means=dict(doc["means"]),
            stds=dict(doc["stds"]),
            counts=dict(doc["counts"]),
            global_mean=float(doc["global_mean"]),
            global_std=float(doc["global_std"]),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise DataError(f"{path}: malformed duration stats: {e}") from e
