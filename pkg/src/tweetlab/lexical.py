"""Tokenization and per-sample lexical metrics: vocabulary size, moving-average
type-token ratio, n-gram diversity, and n-gram entropy (bits)."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

from .corpus import MetricValue, PairedCorpus

# A token is a maximal run of word characters (Unicode letters/digits/underscore)
# or apostrophes; a leading '#' or '@' adheres to the following run.
_TOKEN_RE = re.compile(r"[#@]?[\w'’]+")


@dataclass(frozen=True)
class LexicalConfig:
    mttr_window: int = 10
    ngram_n: int = 2

    def __post_init__(self) -> None:
        if self.mttr_window < 1:
            raise ValueError("mttr_window must be >= 1")
        if self.ngram_n < 1:
            raise ValueError("ngram_n must be >= 1")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def vocabulary_size(tokens: list[str]) -> int:
    return len(set(tokens))


def mttr(tokens: list[str], w: int = 10) -> float | None:
    """Mean type-token ratio over all stride-1 windows of size ``w``; plain TTR
    when the sample is shorter than the window; None for empty input."""
    if w < 1:
        raise ValueError("window must be >= 1")
    n = len(tokens)
    if n == 0:
        return None
    if n < w:
        return len(set(tokens)) / n
    total = 0.0
    for i in range(n - w + 1):
        total += len(set(tokens[i : i + w])) / w
    return total / (n - w + 1)


def ngrams(tokens: list[str], n: int) -> list[tuple[str, ...]]:
    if n < 1:
        raise ValueError("n must be >= 1")
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def ngram_diversity(tokens: list[str], n: int = 2) -> float | None:
    grams = ngrams(tokens, n)
    if not grams:
        return None
    return len(set(grams)) / len(grams)


def ngram_entropy(tokens: list[str], n: int = 2) -> float | None:
    grams = ngrams(tokens, n)
    if not grams:
        return None
    total = len(grams)
    return -sum((c / total) * math.log2(c / total) for c in Counter(grams).values())


LEXICAL_METRICS = ("vocabulary_size", "mttr", "ngram_diversity", "ngram_entropy")


def compute_lexical(corpus: PairedCorpus, cfg: LexicalConfig | None = None) -> list[MetricValue]:
    """One MetricValue per sample per lexical metric, in corpus order."""
    cfg = cfg if cfg is not None else LexicalConfig()
    out: list[MetricValue] = []
    for s in corpus.samples:
        tokens = tokenize(s.text)
        values: dict[str, float | None] = {
            "vocabulary_size": float(vocabulary_size(tokens)),
            "mttr": mttr(tokens, cfg.mttr_window),
            "ngram_diversity": ngram_diversity(tokens, cfg.ngram_n),
            "ngram_entropy": ngram_entropy(tokens, cfg.ngram_n),
        }
        for name in LEXICAL_METRICS:
            out.append(MetricValue(s.id, name, values[name]))
    return out
