"""Per-sample stylometric features: phraseology counts and averages,
punctuation counts, moving-average type-token ratio, and Flesch reading ease."""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, fields
from math import sqrt
from pathlib import Path
from typing import Iterable

from .corpus import PairedCorpus
from .lexical import mttr, tokenize

SENTENCE_TERMINATORS = ".!?"

# Split after a terminator that is followed by whitespace or end-of-text; the
# terminator stays with the preceding sentence.
_SENTENCE_BOUNDARY_RE = re.compile(r"(?<=[.!?])(?=\s|$)")
_PARAGRAPH_RE = re.compile(r"\n\s*\n")

_VOWELS = set("aeiouy")


@dataclass(frozen=True)
class StyloVector:
    word_count: int
    sentence_count: int
    paragraph_count: int
    mean_word_length: float
    mean_words_per_sentence: float
    sd_words_per_sentence: float
    mean_words_per_paragraph: float
    sd_words_per_paragraph: float
    mean_sentences_per_paragraph: float
    sd_sentences_per_paragraph: float
    punct_total: int
    punct_exclaim: int
    punct_question: int
    punct_colon: int
    punct_semicolon: int
    punct_at: int
    punct_hash: int
    mttr: float
    flesch_reading_ease: float


STYLO_FIELDS = tuple(f.name for f in fields(StyloVector))


def split_sentences(text: str) -> list[str]:
    parts = _SENTENCE_BOUNDARY_RE.split(text)
    return [p.strip() for p in parts if p.strip()]


def split_paragraphs(text: str) -> list[str]:
    return [p for p in _PARAGRAPH_RE.split(text) if p.strip()]


def count_syllables(word: str) -> int:
    """Vowel-group heuristic: each maximal run of [aeiouy] counts one syllable;
    a trailing silent 'e' is subtracted unless it is the only vowel group; every
    word has at least one syllable."""
    word = word.lower()
    groups = 0
    last_group_end = -1
    in_group = False
    for i, ch in enumerate(word):
        if ch in _VOWELS:
            if not in_group:
                groups += 1
                in_group = True
            last_group_end = i
        else:
            in_group = False
    if (
        groups >= 2
        and word.endswith("e")
        and last_group_end == len(word) - 1
        and (len(word) < 2 or word[-2] not in _VOWELS)
    ):
        groups -= 1
    return max(groups, 1)


def flesch_reading_ease(text: str) -> float | None:
    """206.835 − 1.015·(words/sentences) − 84.6·(syllables/words); None when
    the text has no words or no sentences."""
    words = tokenize(text)
    sentences = split_sentences(text)
    if not words or not sentences:
        return None
    syllables = sum(count_syllables(w) for w in words)
    return 206.835 - 1.015 * (len(words) / len(sentences)) - 84.6 * (syllables / len(words))


def _mean_sd(values: list[int]) -> tuple[float, float]:
    # Population SD (divisor N); (0, 0) for empty input.
    if not values:
        return 0.0, 0.0
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n
    return mean, sqrt(var)


def extract_stylometry(text: str, mttr_window: int = 10) -> StyloVector:
    paragraphs = split_paragraphs(text)
    # Sentences never span a paragraph break.
    sentences = [s for p in paragraphs for s in split_sentences(p)]
    tokens = tokenize(text)

    words_per_sentence = [len(tokenize(s)) for s in sentences]
    words_per_paragraph = [len(tokenize(p)) for p in paragraphs]
    sentences_per_paragraph = [len(split_sentences(p)) for p in paragraphs]

    mean_wps, sd_wps = _mean_sd(words_per_sentence)
    mean_wpp, sd_wpp = _mean_sd(words_per_paragraph)
    mean_spp, sd_spp = _mean_sd(sentences_per_paragraph)

    punct_total = sum(1 for ch in text if unicodedata.category(ch).startswith("P"))

    mttr_value = mttr(tokens, mttr_window)
    flesch = flesch_reading_ease(text)

    return StyloVector(
        word_count=len(tokens),
        sentence_count=len(sentences),
        paragraph_count=len(paragraphs),
        mean_word_length=(sum(len(t) for t in tokens) / len(tokens)) if tokens else 0.0,
        mean_words_per_sentence=mean_wps,
        sd_words_per_sentence=sd_wps,
        mean_words_per_paragraph=mean_wpp,
        sd_words_per_paragraph=sd_wpp,
        mean_sentences_per_paragraph=mean_spp,
        sd_sentences_per_paragraph=sd_spp,
        punct_total=punct_total,
        punct_exclaim=text.count("!"),
        punct_question=text.count("?"),
        punct_colon=text.count(":"),
        punct_semicolon=text.count(";"),
        punct_at=text.count("@"),
        punct_hash=text.count("#"),
        mttr=mttr_value if mttr_value is not None else 0.0,
        flesch_reading_ease=flesch if flesch is not None else 0.0,
    )


def compute_stylometry(corpus: PairedCorpus, mttr_window: int = 10) -> list[tuple[str, StyloVector]]:
    return [(s.id, extract_stylometry(s.text, mttr_window)) for s in corpus.samples]


def save_stylometry(rows: Iterable[tuple[str, StyloVector]], path: str | Path) -> None:
    path = Path(path)
    lines = []
    for sample_id, vec in rows:
        record = {"sample_id": sample_id}
        for name in STYLO_FIELDS:
            record[name] = getattr(vec, name)
        lines.append(json.dumps(record, ensure_ascii=False))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("".join(line + "\n" for line in lines))
