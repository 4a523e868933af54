"""Session fixtures: tiny seeded checkpoints and a small corpus, built on the
fly so the suite needs no network or pretrained downloads."""

from __future__ import annotations

from pathlib import Path

import pytest
import torch
import transformers
from transformers import BertConfig, BertForSequenceClassification, BertModel, BertTokenizer

from tweetlab.corpus import PairedCorpus, TextSample, save_corpus

transformers.logging.disable_progress_bar()
transformers.logging.set_verbosity_error()

VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "the", "a", "quiet", "morning", "walk", "woke", "me", "up", "today",
    "fresh", "bread", "smells", "like", "home", "rain", "kept", "everyone",
    "inside", "all", "day", "cat", "nap", "won", "again", "##s", "##ing",
    ".", "!", "?",
]

_BASE_CONFIG = dict(
    vocab_size=len(VOCAB),
    hidden_size=16,
    num_hidden_layers=2,
    num_attention_heads=2,
    intermediate_size=32,
    max_position_embeddings=64,
)


def _save_tokenizer(directory: Path) -> None:
    vocab_file = directory / "vocab.txt"
    vocab_file.write_text("\n".join(VOCAB) + "\n", encoding="utf-8")
    BertTokenizer(str(vocab_file)).save_pretrained(directory)


@pytest.fixture(scope="session")
def embed_checkpoint(tmp_path_factory) -> str:
    directory = tmp_path_factory.mktemp("encoder")
    torch.manual_seed(11)
    BertModel(BertConfig(**_BASE_CONFIG)).save_pretrained(directory)
    _save_tokenizer(directory)
    return str(directory)


@pytest.fixture(scope="session")
def detector_checkpoint(tmp_path_factory) -> str:
    directory = tmp_path_factory.mktemp("detector")
    torch.manual_seed(22)
    BertForSequenceClassification(BertConfig(num_labels=2, **_BASE_CONFIG)).save_pretrained(
        directory
    )
    _save_tokenizer(directory)
    return str(directory)


@pytest.fixture(scope="session")
def toxicity_checkpoint(tmp_path_factory) -> str:
    directory = tmp_path_factory.mktemp("toxicity")
    labels = ["toxic", "severe_toxic", "obscene", "threat", "insult", "identity_hate"]
    config = BertConfig(
        num_labels=len(labels),
        id2label={i: name for i, name in enumerate(labels)},
        label2id={name: i for i, name in enumerate(labels)},
        problem_type="multi_label_classification",
        **_BASE_CONFIG,
    )
    torch.manual_seed(33)
    model = BertForSequenceClassification(config)
    with torch.no_grad():
        # Push every category clearly below the 0.5 sigmoid midpoint so the
        # benign fixture text scores low regardless of the random weights.
        model.classifier.bias.fill_(-3.0)
    model.save_pretrained(directory)
    _save_tokenizer(directory)
    return str(directory)


SAMPLES = (
    TextSample("b1", "The quiet morning walk woke me up today.", 0, "Human", "joy"),
    TextSample("b2", "Fresh bread smells like home.", 0, "Human", "joy"),
    TextSample("b3", "Fresh bread smells like home.", 1, "Mistral", "joy"),
    TextSample("b4", "Rain kept everyone inside all day!", 1, "Qwen2-Dolphin", "sadness"),
)


@pytest.fixture(scope="session")
def corpus_file(tmp_path_factory) -> str:
    path = tmp_path_factory.mktemp("corpus") / "corpus.csv"
    save_corpus(PairedCorpus(SAMPLES), path)
    return str(path)
