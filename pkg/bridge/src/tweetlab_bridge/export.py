"""The three exporters.

Every output file is written with the core toolkit's own savers, so the
formats match its loaders byte for byte.  Inference runs one sample at a
time inside each batch (no cross-sample padding), which makes every exported
value independent of corpus order and batch size by construction; exports are
therefore deterministic given (checkpoint, corpus, config).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Iterator, Sequence

import torch
from transformers import AutoModel, AutoModelForSequenceClassification, AutoTokenizer

from tweetlab.corpus import (
    TOXICITY_CATEGORIES,
    PredictionRun,
    TextSample,
    TokenEmbeddings,
    ToxicityScores,
    load_corpus,
    save_embeddings,
    save_predictions,
    save_toxicity,
)

from .config import BridgeConfig, BridgeError

# Model label names vary across toxicity checkpoints; normalize to the
# category names the core's toxicity file format expects.
_CATEGORY_ALIASES = {
    "toxic": "toxicity",
    "toxicity": "toxicity",
    "severe_toxic": "severe_toxicity",
    "severe_toxicity": "severe_toxicity",
    "obscene": "obscene",
    "threat": "threat",
    "insult": "insult",
    "identity_hate": "identity_attack",
    "identity_attack": "identity_attack",
}

# Tokenizers without a configured limit report a huge sentinel value.
_MAX_LENGTH_SENTINEL = 10**9


def _load(model_id: str, auto_cls):
    try:
        tokenizer = AutoTokenizer.from_pretrained(model_id)
        model = auto_cls.from_pretrained(model_id)
    except Exception as exc:
        raise BridgeError(f"cannot load checkpoint {model_id!r}: {exc}") from exc
    model.eval()
    return tokenizer, model


def _effective_max_length(cfg: BridgeConfig, tokenizer, model) -> int:
    if cfg.max_length is not None:
        return cfg.max_length
    limit = getattr(tokenizer, "model_max_length", None)
    if limit is not None and limit < _MAX_LENGTH_SENTINEL:
        return int(limit)
    return int(model.config.max_position_embeddings)


def _batches(samples: Sequence[TextSample], size: int) -> Iterator[Sequence[TextSample]]:
    for start in range(0, len(samples), size):
        yield samples[start : start + size]


def _encode(tokenizer, text: str, max_length: int, device: torch.device):
    encoded = tokenizer(
        text,
        truncation=True,
        max_length=max_length,
        return_special_tokens_mask=True,
        return_tensors="pt",
    )
    special_mask = encoded.pop("special_tokens_mask")[0].tolist()
    inputs = {k: v.to(device) for k, v in encoded.items()}
    return inputs, special_mask


def export_embeddings(cfg: BridgeConfig) -> tuple[int, int]:
    """Write last-layer hidden states per surface token; returns the record
    count and how many samples were truncated (also listed in a sidecar)."""
    corpus = load_corpus(cfg.corpus_path)
    tokenizer, model = _load(cfg.model_id, AutoModel)
    device = torch.device(cfg.device)
    model.to(device)
    max_length = _effective_max_length(cfg, tokenizer, model)

    records: list[TokenEmbeddings] = []
    truncations: list[dict[str, int | str]] = []
    with torch.no_grad():
        for batch in _batches(corpus.samples, cfg.batch_size):
            for sample in batch:
                full_count = len(tokenizer.tokenize(sample.text))
                inputs, special_mask = _encode(tokenizer, sample.text, max_length, device)
                hidden = model(**inputs).last_hidden_state[0]
                token_ids = inputs["input_ids"][0].tolist()
                surface = tokenizer.convert_ids_to_tokens(token_ids)
                tokens = []
                vectors = []
                for position, (token, special) in enumerate(zip(surface, special_mask)):
                    if special:
                        continue
                    tokens.append(token)
                    vectors.append(tuple(float(x) for x in hidden[position]))
                if len(tokens) < full_count:
                    truncations.append(
                        {
                            "sample_id": sample.id,
                            "token_count": full_count,
                            "kept_tokens": len(tokens),
                        }
                    )
                records.append(TokenEmbeddings(sample.id, tuple(tokens), tuple(vectors)))

    save_embeddings(records, int(model.config.hidden_size), cfg.output_path)
    if truncations:
        sidecar = Path(str(cfg.output_path) + ".truncated.jsonl")
        with open(sidecar, "w", encoding="utf-8", newline="") as fh:
            for record in truncations:
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
        print(
            f"warning: {len(truncations)} sample(s) exceeded max length {max_length} "
            f"and were truncated (see {sidecar})",
            file=sys.stderr,
        )
    return len(records), len(truncations)


def export_probabilities(cfg: BridgeConfig, run_id: str, detector_name: str) -> int:
    """Write [p_human, p_generated] per sample from a 2-class classifier."""
    corpus = load_corpus(cfg.corpus_path)
    tokenizer, model = _load(cfg.model_id, AutoModelForSequenceClassification)
    if model.config.num_labels != 2:
        raise BridgeError(
            f"checkpoint {cfg.model_id!r} predicts {model.config.num_labels} labels; "
            "class-probability export needs exactly 2 ([p_human, p_generated])"
        )
    device = torch.device(cfg.device)
    model.to(device)
    max_length = _effective_max_length(cfg, tokenizer, model)

    entries: dict[str, tuple[float, float]] = {}
    with torch.no_grad():
        for batch in _batches(corpus.samples, cfg.batch_size):
            for sample in batch:
                inputs, _ = _encode(tokenizer, sample.text, max_length, device)
                logits = model(**inputs).logits[0]
                probs = torch.softmax(logits.double(), dim=-1)
                entries[sample.id] = (float(probs[0]), float(probs[1]))

    save_predictions(PredictionRun(run_id, detector_name, entries), cfg.output_path)
    return len(entries)


def export_toxicity(cfg: BridgeConfig) -> int:
    """Write the six toxicity category scores per sample (independent
    sigmoids over a multi-label classifier's logits)."""
    corpus = load_corpus(cfg.corpus_path)
    tokenizer, model = _load(cfg.model_id, AutoModelForSequenceClassification)
    column_for: dict[str, int] = {}
    for index, label in model.config.id2label.items():
        name = _CATEGORY_ALIASES.get(str(label).strip().lower().replace(" ", "_").replace("-", "_"))
        if name is not None and name not in column_for:
            column_for[name] = int(index)
    missing = [c for c in TOXICITY_CATEGORIES if c not in column_for]
    if missing:
        raise BridgeError(
            f"checkpoint {cfg.model_id!r} does not score categories: {', '.join(missing)}"
        )
    device = torch.device(cfg.device)
    model.to(device)
    max_length = _effective_max_length(cfg, tokenizer, model)

    entries: dict[str, dict[str, float]] = {}
    with torch.no_grad():
        for batch in _batches(corpus.samples, cfg.batch_size):
            for sample in batch:
                inputs, _ = _encode(tokenizer, sample.text, max_length, device)
                scores = torch.sigmoid(model(**inputs).logits[0])
                entries[sample.id] = {
                    category: float(scores[column_for[category]])
                    for category in TOXICITY_CATEGORIES
                }

    save_toxicity(ToxicityScores(entries), cfg.output_path)
    return len(entries)
