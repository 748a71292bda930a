"""Pluggable token normalizers.

A normalizer turns one sentence into a list of (lemma, pos) tokens. Real
deployments plug in a morphological analyzer; the built-in default is a
whitespace tokenizer that lowercases and strips surrounding punctuation,
emitting no POS tags. Language detectors are pluggable the same way:
a callable mapping a sentence to an ISO language code.
"""

from __future__ import annotations

import string
from typing import Callable, NamedTuple


class NormalizedToken(NamedTuple):
    lemma: str
    pos: str | None = None


Normalizer = Callable[[str], list[NormalizedToken]]
LanguageDetector = Callable[[str], str]

_PUNCT = string.punctuation + "«»„“”‘’…–—"

_NORMALIZERS: dict[str, Normalizer] = {}
_DETECTORS: dict[str, LanguageDetector] = {}


def register_normalizer(name: str, fn: Normalizer) -> None:
    if name in _NORMALIZERS:
        raise ValueError(f"normalizer {name!r} already registered")
    _NORMALIZERS[name] = fn


def get_normalizer(name: str) -> Normalizer:
    try:
        return _NORMALIZERS[name]
    except KeyError:
        raise KeyError(
            f"unknown normalizer {name!r}; registered: {sorted(_NORMALIZERS)}"
        ) from None


def register_language_detector(name: str, fn: LanguageDetector) -> None:
    if name in _DETECTORS:
        raise ValueError(f"language detector {name!r} already registered")
    _DETECTORS[name] = fn


def get_language_detector(name: str) -> LanguageDetector:
    try:
        return _DETECTORS[name]
    except KeyError:
        raise KeyError(
            f"unknown language detector {name!r}; registered: {sorted(_DETECTORS)}"
        ) from None


def whitespace_normalizer(sentence: str) -> list[NormalizedToken]:
    """Lowercase, split on whitespace, strip surrounding punctuation."""
    out = []
    for raw in sentence.lower().split():
        lemma = raw.strip(_PUNCT)
        if lemma:
            out.append(NormalizedToken(lemma=lemma, pos=None))
    return out


register_normalizer("whitespace", whitespace_normalizer)
