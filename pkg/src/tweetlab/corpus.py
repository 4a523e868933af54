"""Data model and file I/O for paired corpora, embeddings, predictions, and toxicity scores.

All writers are deterministic: fixed column/key order, UTF-8, ``\\n`` line
endings, no timestamps.  Loading a file produced by one of the writers and
saving it again yields byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping

SOURCES = (
    "Human",
    "LL3",
    "LL3-Dolphin",
    "LL3-Hermes",
    "Mistral",
    "Mistral-Dolphin",
    "Mistral-Hermes",
    "Qwen2",
    "Qwen2-Dolphin",
    "GPT4o",
)

EMOTIONS = ("anger", "joy", "optimism", "sadness")

SPLITS = ("train", "validation", "test")

TOXICITY_CATEGORIES = (
    "toxicity",
    "severe_toxicity",
    "obscene",
    "threat",
    "insult",
    "identity_attack",
)

CSV_HEADER = ("id", "text", "label", "source", "emotion", "pair_id", "split")

LABEL_HUMAN = 0
LABEL_GENERATED = 1


class CorpusError(ValueError):
    """Raised for malformed input files or corpus invariant violations."""


@dataclass(frozen=True)
class TextSample:
    id: str
    text: str
    label: int
    source: str
    emotion: str | None = None
    pair_id: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise CorpusError("sample id must be a non-empty string")
        if self.label not in (LABEL_HUMAN, LABEL_GENERATED):
            raise CorpusError(f"sample {self.id!r}: label must be 0 or 1, got {self.label!r}")
        if self.source not in SOURCES:
            raise CorpusError(f"sample {self.id!r}: unknown source {self.source!r}")
        if self.emotion is not None and self.emotion not in EMOTIONS:
            raise CorpusError(f"sample {self.id!r}: unknown emotion {self.emotion!r}")


@dataclass(frozen=True)
class PairedCorpus:
    samples: tuple[TextSample, ...]
    # id -> split name; None when no splits have been assigned
    splits: Mapping[str, str] | None = None

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def sample_map(self) -> dict[str, TextSample]:
        return {s.id: s for s in self.samples}

    def split_of(self, sample_id: str) -> str | None:
        if self.splits is None:
            return None
        return self.splits.get(sample_id)


def validate(corpus: PairedCorpus) -> list[str]:
    """Return a list of invariant-violation messages (empty when valid)."""
    problems: list[str] = []
    by_id: dict[str, TextSample] = {}
    for s in corpus.samples:
        if s.id in by_id:
            problems.append(f"duplicate sample id {s.id!r}")
        else:
            by_id[s.id] = s

    for s in corpus.samples:
        human = s.source == "Human"
        if human != (s.label == LABEL_HUMAN):
            problems.append(f"sample {s.id!r}: label {s.label} inconsistent with source {s.source!r}")

    pair_targets: dict[str, str] = {}
    for s in corpus.samples:
        if s.pair_id is None:
            continue
        other = by_id.get(s.pair_id)
        if other is None:
            problems.append(f"sample {s.id!r}: pair_id {s.pair_id!r} does not exist")
            continue
        if other.label == s.label:
            problems.append(f"sample {s.id!r}: pair_id {s.pair_id!r} has the same label")
        if s.pair_id in pair_targets:
            problems.append(
                f"samples {pair_targets[s.pair_id]!r} and {s.id!r} both pair to {s.pair_id!r}"
            )
        else:
            pair_targets[s.pair_id] = s.id

    if corpus.splits is not None:
        for sid, split_name in corpus.splits.items():
            if split_name not in SPLITS:
                problems.append(f"sample {sid!r}: unknown split {split_name!r}")
            if sid not in by_id:
                problems.append(f"split assignment references unknown sample id {sid!r}")
        for s in corpus.samples:
            if s.pair_id is None or s.pair_id not in by_id:
                continue
            a = corpus.splits.get(s.id)
            b = corpus.splits.get(s.pair_id)
            if a != b:
                problems.append(
                    f"sample {s.id!r} in split {a!r} but its pair {s.pair_id!r} is in {b!r}"
                )
    return problems


def _require_valid(corpus: PairedCorpus) -> PairedCorpus:
    problems = validate(corpus)
    if problems:
        raise CorpusError("; ".join(problems))
    return corpus


def _parse_row(row: Mapping[str, str], where: str) -> tuple[TextSample, str | None]:
    missing = [k for k in CSV_HEADER if k not in row or row[k] is None]
    if missing:
        raise CorpusError(f"{where}: missing field(s) {', '.join(missing)}")
    try:
        label = int(row["label"])
    except ValueError:
        raise CorpusError(f"{where}: label must be an integer, got {row['label']!r}") from None
    try:
        sample = TextSample(
            id=str(row["id"]),
            text=str(row["text"]),
            label=label,
            source=str(row["source"]),
            emotion=str(row["emotion"]) if row["emotion"] else None,
            pair_id=str(row["pair_id"]) if row["pair_id"] else None,
        )
    except CorpusError as exc:
        raise CorpusError(f"{where}: {exc}") from None
    split_name = str(row["split"]) if row["split"] else None
    if split_name is not None and split_name not in SPLITS:
        raise CorpusError(f"{where}: unknown split {split_name!r}")
    return sample, split_name


def _infer_format(path: Path, format: str | None) -> str:
    if format is not None:
        if format not in ("csv", "jsonl"):
            raise CorpusError(f"unknown corpus format {format!r}")
        return format
    suffix = path.suffix.lower()
    if suffix == ".csv":
        return "csv"
    if suffix in (".jsonl", ".json"):
        return "jsonl"
    raise CorpusError(f"cannot infer corpus format from {path.name!r}; pass format='csv' or 'jsonl'")


def load_corpus(path: str | Path, format: str | None = None) -> PairedCorpus:
    path = Path(path)
    fmt = _infer_format(path, format)
    samples: list[TextSample] = []
    splits: dict[str, str] = {}

    if fmt == "csv":
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise CorpusError(f"{path}: empty file, expected header row")
            if tuple(reader.fieldnames) != CSV_HEADER:
                raise CorpusError(
                    f"{path}: bad header {reader.fieldnames!r}, expected {list(CSV_HEADER)!r}"
                )
            for row in reader:
                if None in row or any(v is None for v in row.values()):
                    raise CorpusError(f"{path}: line {reader.line_num}: wrong number of fields")
                sample, split_name = _parse_row(row, f"{path}: line {reader.line_num}")
                samples.append(sample)
                if split_name is not None:
                    splits[sample.id] = split_name
    else:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from None
                if not isinstance(obj, dict):
                    raise CorpusError(f"{path}: line {lineno}: expected a JSON object")
                row = {k: ("" if obj.get(k) is None else obj.get(k, "")) for k in CSV_HEADER}
                if not isinstance(row["label"], (int, str)):
                    raise CorpusError(f"{path}: line {lineno}: label must be an integer")
                sample, split_name = _parse_row(row, f"{path}: line {lineno}")
                samples.append(sample)
                if split_name is not None:
                    splits[sample.id] = split_name

    corpus = PairedCorpus(tuple(samples), splits or None)
    return _require_valid(corpus)


def save_corpus(corpus: PairedCorpus, path: str | Path, format: str | None = None) -> None:
    path = Path(path)
    fmt = _infer_format(path, format)
    _require_valid(corpus)

    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for s in corpus.samples:
            writer.writerow(
                [
                    s.id,
                    s.text,
                    s.label,
                    s.source,
                    s.emotion or "",
                    s.pair_id or "",
                    corpus.split_of(s.id) or "",
                ]
            )
        data = buf.getvalue()
    else:
        lines = []
        for s in corpus.samples:
            record = {
                "id": s.id,
                "text": s.text,
                "label": s.label,
                "source": s.source,
                "emotion": s.emotion,
                "pair_id": s.pair_id,
                "split": corpus.split_of(s.id),
            }
            lines.append(json.dumps(record, ensure_ascii=False))
        data = "".join(line + "\n" for line in lines)

    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(data)


# ---------------------------------------------------------------------------
# Token embeddings


@dataclass(frozen=True)
class TokenEmbeddings:
    sample_id: str
    tokens: tuple[str, ...]
    vectors: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        if len(self.tokens) != len(self.vectors):
            raise CorpusError(
                f"embeddings for {self.sample_id!r}: {len(self.tokens)} tokens but "
                f"{len(self.vectors)} vectors"
            )

    @property
    def dim(self) -> int:
        return len(self.vectors[0]) if self.vectors else 0


def load_embeddings(path: str | Path) -> dict[str, TokenEmbeddings]:
    """Load a token-embedding file: a ``{"dim": d}`` header record followed by
    one record per sample.  Returns an id-keyed dict in file order."""
    path = Path(path)
    out: dict[str, TokenEmbeddings] = {}
    dim: int | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from None
            if dim is None:
                if not isinstance(obj, dict) or "dim" not in obj:
                    raise CorpusError(f"{path}: line {lineno}: expected header record with 'dim'")
                dim = int(obj["dim"])
                if dim <= 0:
                    raise CorpusError(f"{path}: line {lineno}: dim must be positive, got {dim}")
                continue
            try:
                sample_id = str(obj["sample_id"])
                tokens = tuple(str(t) for t in obj["tokens"])
                vectors = tuple(tuple(float(x) for x in vec) for vec in obj["vectors"])
            except (KeyError, TypeError, ValueError) as exc:
                raise CorpusError(f"{path}: line {lineno}: malformed embedding record ({exc})") from None
            for vec in vectors:
                if len(vec) != dim:
                    raise CorpusError(
                        f"{path}: line {lineno}: vector of length {len(vec)}, expected dim {dim}"
                    )
            if sample_id in out:
                raise CorpusError(f"{path}: line {lineno}: duplicate sample_id {sample_id!r}")
            out[sample_id] = TokenEmbeddings(sample_id, tokens, vectors)
    if dim is None:
        raise CorpusError(f"{path}: empty embedding file, expected a header record")
    return out


def save_embeddings(embeddings: Iterable[TokenEmbeddings], dim: int, path: str | Path) -> None:
    path = Path(path)
    lines = [json.dumps({"dim": int(dim)})]
    for emb in embeddings:
        for vec in emb.vectors:
            if len(vec) != dim:
                raise CorpusError(
                    f"embeddings for {emb.sample_id!r}: vector of length {len(vec)}, expected {dim}"
                )
        record = {
            "sample_id": emb.sample_id,
            "tokens": list(emb.tokens),
            "vectors": [list(vec) for vec in emb.vectors],
        }
        lines.append(json.dumps(record, ensure_ascii=False))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("".join(line + "\n" for line in lines))


# ---------------------------------------------------------------------------
# Detector predictions


@dataclass(frozen=True)
class PredictionRun:
    run_id: str
    detector_name: str
    # sample_id -> (p_human, p_generated)
    entries: Mapping[str, tuple[float, float]]


def load_predictions(path: str | Path) -> PredictionRun:
    path = Path(path)
    run_id: str | None = None
    detector_name: str | None = None
    entries: dict[str, tuple[float, float]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from None
            if run_id is None:
                if not isinstance(obj, dict) or "run_id" not in obj or "detector_name" not in obj:
                    raise CorpusError(
                        f"{path}: line {lineno}: expected header with run_id and detector_name"
                    )
                run_id = str(obj["run_id"])
                detector_name = str(obj["detector_name"])
                continue
            try:
                sample_id = str(obj["sample_id"])
                probs = tuple(float(p) for p in obj["probs"])
            except (KeyError, TypeError, ValueError) as exc:
                raise CorpusError(f"{path}: line {lineno}: malformed prediction record ({exc})") from None
            if len(probs) != 2:
                raise CorpusError(f"{path}: line {lineno}: expected 2 class probabilities")
            if min(probs) < 0.0 or abs(sum(probs) - 1.0) > 1e-6:
                raise CorpusError(
                    f"{path}: line {lineno}: probabilities must be non-negative and sum to 1"
                )
            if sample_id in entries:
                raise CorpusError(f"{path}: line {lineno}: duplicate sample_id {sample_id!r}")
            entries[sample_id] = (probs[0], probs[1])
    if run_id is None or detector_name is None:
        raise CorpusError(f"{path}: empty prediction file, expected a header record")
    return PredictionRun(run_id, detector_name, entries)


def save_predictions(run: PredictionRun, path: str | Path) -> None:
    path = Path(path)
    lines = [json.dumps({"run_id": run.run_id, "detector_name": run.detector_name}, ensure_ascii=False)]
    for sample_id, probs in run.entries.items():
        lines.append(json.dumps({"sample_id": sample_id, "probs": list(probs)}, ensure_ascii=False))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("".join(line + "\n" for line in lines))


# ---------------------------------------------------------------------------
# Toxicity scores


@dataclass(frozen=True)
class ToxicityScores:
    # sample_id -> category -> score in [0, 1]
    entries: Mapping[str, Mapping[str, float]]


def load_toxicity(path: str | Path) -> ToxicityScores:
    path = Path(path)
    entries: dict[str, dict[str, float]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from None
            try:
                sample_id = str(obj["sample_id"])
                raw = dict(obj["scores"])
            except (KeyError, TypeError) as exc:
                raise CorpusError(f"{path}: line {lineno}: malformed toxicity record ({exc})") from None
            missing = [c for c in TOXICITY_CATEGORIES if c not in raw]
            if missing:
                raise CorpusError(f"{path}: line {lineno}: missing categories {', '.join(missing)}")
            extra = [c for c in raw if c not in TOXICITY_CATEGORIES]
            if extra:
                raise CorpusError(f"{path}: line {lineno}: unknown categories {', '.join(extra)}")
            scores = {c: float(raw[c]) for c in TOXICITY_CATEGORIES}
            for c, v in scores.items():
                if not 0.0 <= v <= 1.0:
                    raise CorpusError(f"{path}: line {lineno}: {c} score {v} outside [0, 1]")
            if sample_id in entries:
                raise CorpusError(f"{path}: line {lineno}: duplicate sample_id {sample_id!r}")
            entries[sample_id] = scores
    return ToxicityScores(entries)


def save_toxicity(scores: ToxicityScores, path: str | Path) -> None:
    path = Path(path)
    lines = []
    for sample_id, cat_scores in scores.entries.items():
        record = {
            "sample_id": sample_id,
            "scores": {c: float(cat_scores[c]) for c in TOXICITY_CATEGORIES},
        }
        lines.append(json.dumps(record, ensure_ascii=False))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("".join(line + "\n" for line in lines))


# ---------------------------------------------------------------------------
# Per-sample metric records (shared output format of the metric stages)


@dataclass(frozen=True)
class MetricValue:
    sample_id: str
    metric_name: str
    value: float | None  # None marks a sample excluded from this metric


def save_metrics(records: Iterable[MetricValue], path: str | Path) -> None:
    path = Path(path)
    lines = []
    for r in records:
        lines.append(
            json.dumps(
                {"sample_id": r.sample_id, "metric_name": r.metric_name, "value": r.value},
                ensure_ascii=False,
            )
        )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("".join(line + "\n" for line in lines))


def load_metrics(path: str | Path) -> list[MetricValue]:
    path = Path(path)
    out: list[MetricValue] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                value = obj["value"]
                out.append(
                    MetricValue(
                        sample_id=str(obj["sample_id"]),
                        metric_name=str(obj["metric_name"]),
                        value=None if value is None else float(value),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise CorpusError(f"{path}: line {lineno}: malformed metric record ({exc})") from None
    return out


def filter_corpus(corpus: PairedCorpus, keep_ids: set[str]) -> PairedCorpus:
    """Subset a corpus to ``keep_ids``, clearing pair links that leave the subset
    and restricting split assignments to surviving samples."""
    kept = []
    for s in corpus.samples:
        if s.id not in keep_ids:
            continue
        if s.pair_id is not None and s.pair_id not in keep_ids:
            s = replace(s, pair_id=None)
        kept.append(s)
    splits = None
    if corpus.splits is not None:
        splits = {sid: sp for sid, sp in corpus.splits.items() if sid in keep_ids}
        splits = splits or None
    return PairedCorpus(tuple(kept), splits)
