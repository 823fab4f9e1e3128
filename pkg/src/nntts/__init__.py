"""Modular neural-network text-to-speech pipeline.

Stages: text preprocessing and lexicon lookup, letter-to-sound and
postlexical networks, a duration network, a phonetic (frame) network, and
a mixed-excitation LSF vocoder that renders WAV audio.
"""

__version__ = "0.1.0"
