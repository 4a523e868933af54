"""Embedding-based metrics computed from token-embedding files: cosine
similarity, per-sentence pairwise similarity, intra-sample similarity, and
greedy-matching BERTScore-F1 (raw: no IDF weighting, no baseline rescaling)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .corpus import MetricValue, PairedCorpus, TokenEmbeddings
from .stylometry import SENTENCE_TERMINATORS


@dataclass(frozen=True)
class ISSConfig:
    theta: float = 0.5
    epsilon: float = 1e-8

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must be in [0, 1]")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")


def cosine(u: Sequence[float], v: Sequence[float]) -> float:
    ua = np.asarray(u, dtype=float)
    va = np.asarray(v, dtype=float)
    if ua.shape != va.shape or ua.ndim != 1:
        raise ValueError(f"dimension mismatch: {ua.shape} vs {va.shape}")
    uu = float(ua @ ua)
    vv = float(va @ va)
    if uu == 0.0 or vv == 0.0:
        raise ValueError("cosine undefined for zero vectors")
    # Single square root of the product keeps cosine(v, v) == 1.0 exactly.
    return float(ua @ va) / math.sqrt(uu * vv)


def sentence_similarity(words: Sequence[Sequence[float]]) -> float | None:
    """Mean pairwise cosine over all word pairs; None for sentences with fewer
    than two words (excluded from aggregation)."""
    m = len(words)
    if m < 2:
        return None
    total = 0.0
    for j in range(m):
        for k in range(j + 1, m):
            total += cosine(words[j], words[k])
    return 2.0 / (m * (m - 1)) * total


def intra_sample_similarity(
    sentences: Sequence[Sequence[Sequence[float]]], cfg: ISSConfig | None = None
) -> float | None:
    """N / max(Σ_i |S_i − θ|, ε) over the N sentences with at least two words;
    None when no sentence qualifies."""
    cfg = cfg if cfg is not None else ISSConfig()
    sims = [s for s in (sentence_similarity(words) for words in sentences) if s is not None]
    if not sims:
        return None
    deviation = sum(abs(s - cfg.theta) for s in sims)
    return len(sims) / max(deviation, cfg.epsilon)


def _similarity_matrix(candidate: TokenEmbeddings, reference: TokenEmbeddings) -> np.ndarray:
    if not candidate.tokens or not reference.tokens:
        raise ValueError("bertscore_f1 requires non-empty token lists")
    c = np.asarray(candidate.vectors, dtype=float)
    r = np.asarray(reference.vectors, dtype=float)
    if c.shape[1] != r.shape[1]:
        raise ValueError(f"dimension mismatch: {c.shape[1]} vs {r.shape[1]}")
    # Norms come through the same matmul pathway as the cross products so that
    # identical inputs yield an exactly-1.0 diagonal.
    cn2 = np.diag(c @ c.T)
    rn2 = np.diag(r @ r.T)
    if np.min(cn2) == 0.0 or np.min(rn2) == 0.0:
        raise ValueError("bertscore_f1 undefined for zero vectors")
    sim = (c @ r.T) / np.sqrt(np.outer(cn2, rn2))
    return np.clip(sim, -1.0, 1.0)


def bertscore_f1(candidate: TokenEmbeddings, reference: TokenEmbeddings) -> float:
    """Greedy max-cosine token matching: precision over candidate tokens,
    recall over reference tokens, harmonic mean."""
    sim = _similarity_matrix(candidate, reference)
    precision = float(np.mean(np.max(sim, axis=1)))
    recall = float(np.mean(np.max(sim, axis=0)))
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def group_sentence_vectors(emb: TokenEmbeddings) -> list[list[tuple[float, ...]]]:
    """Split a token stream into sentence spans on tokens ending with '.', '!'
    or '?'; the closing token stays with its sentence."""
    groups: list[list[tuple[float, ...]]] = []
    current: list[tuple[float, ...]] = []
    for token, vec in zip(emb.tokens, emb.vectors):
        current.append(vec)
        if token and token[-1] in SENTENCE_TERMINATORS:
            groups.append(current)
            current = []
    if current:
        groups.append(current)
    return groups


EMBEDDING_METRICS = ("iss", "bertscore_f1")


def compute_embedding_metrics(
    corpus: PairedCorpus,
    embeddings: Mapping[str, TokenEmbeddings],
    cfg: ISSConfig | None = None,
    paired: bool = False,
) -> list[MetricValue]:
    """Per-sample intra-sample similarity records; with ``paired``, BERTScore-F1
    for each generated sample against its human counterpart.  Samples without
    embeddings (or without a usable sentence/pair) yield not-applicable records."""
    cfg = cfg if cfg is not None else ISSConfig()
    out: list[MetricValue] = []
    by_id = corpus.sample_map()
    for s in corpus.samples:
        emb = embeddings.get(s.id)
        if emb is None or not emb.tokens:
            out.append(MetricValue(s.id, "iss", None))
        else:
            out.append(MetricValue(s.id, "iss", intra_sample_similarity(group_sentence_vectors(emb), cfg)))
    if paired:
        for s in corpus.samples:
            if s.label != 1:
                continue
            value: float | None = None
            if s.pair_id is not None and s.pair_id in by_id:
                cand = embeddings.get(s.id)
                ref = embeddings.get(s.pair_id)
                if cand is not None and ref is not None and cand.tokens and ref.tokens:
                    value = bertscore_f1(cand, ref)
            out.append(MetricValue(s.id, "bertscore_f1", value))
    return out
