"""Acceptance suite: one test per release criterion, each printing a PASS/FAIL
line.  Every numeric check runs against an independent brute-force oracle or a
committed fixture; tolerances are part of the contract and must not be widened.
"""

from __future__ import annotations

import json
import math
import random
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

import oracles
from tweetlab.corpus import (
    PairedCorpus,
    PredictionRun,
    TextSample,
    TokenEmbeddings,
    load_corpus,
    save_metrics,
)
from tweetlab.dataset import SplitSpec, pair_samples, split
from tweetlab.embedding import (
    ISSConfig,
    bertscore_f1,
    intra_sample_similarity,
    sentence_similarity,
)
from tweetlab.evaluation import ConfusionCounts, confusion_metrics, metrics_from_counts, soft_vote
from tweetlab.lexical import (
    LexicalConfig,
    mttr,
    ngram_diversity,
    ngram_entropy,
    vocabulary_size,
)
from tweetlab.cli import _lexical_records, _stylometry_rows
from tweetlab.postprocess import process_corpus
from tweetlab.stats import (
    bh_adjust,
    compare_all,
    group_metric_values,
    mean_diff_ci,
    t_cdf,
    welch_t,
)
from tweetlab.stylometry import save_stylometry

FIXTURE_DIR = Path(__file__).parent / "fixtures"


@contextmanager
def criterion(capsys, name: str):
    ok = False
    try:
        yield
        ok = True
    finally:
        with capsys.disabled():
            print(f"[{'PASS' if ok else 'FAIL'}] {name}")


# ---------------------------------------------------------------------------
# Lexical metric oracle suite


def test_lexical_metrics_match_brute_force(capsys):
    with criterion(
        capsys,
        "lexical metrics: 500 random token lists match brute-force enumeration "
        "(ints exact, reals within 1e-12, < 5 s)",
    ):
        rng = random.Random(501)
        words = ["sun", "rain", "go", "stay", "the", "a", "ok", "run"]
        start = time.perf_counter()
        for _ in range(500):
            tokens = [rng.choice(words) for _ in range(rng.randint(0, 12))]
            window = rng.randint(1, 6)
            n = rng.randint(1, 4)
            assert vocabulary_size(tokens) == oracles.vocabulary_size(tokens)
            for mine, reference in (
                (mttr(tokens, window), oracles.mttr(tokens, window)),
                (ngram_diversity(tokens, n), oracles.ngram_diversity(tokens, n)),
                (ngram_entropy(tokens, n), oracles.ngram_entropy(tokens, n)),
            ):
                if reference is None:
                    assert mine is None
                else:
                    assert mine == pytest.approx(reference, abs=1e-12)
        assert time.perf_counter() - start < 5.0


# ---------------------------------------------------------------------------
# Embedding metric oracle suite


def _random_vector(rng: random.Random, dim: int = 8) -> list[float]:
    while True:
        v = [rng.uniform(-1.0, 1.0) for _ in range(dim)]
        if math.sqrt(sum(x * x for x in v)) > 1e-3:
            return v


def _unit(v: list[float]) -> tuple[float, ...]:
    norm = math.sqrt(sum(x * x for x in v))
    return tuple(x / norm for x in v)


def test_embedding_metrics_match_brute_force(capsys):
    with criterion(
        capsys,
        "embedding metrics: 200 random sets (<=4 tokens, <=4 sentences, d=8) match "
        "pair enumeration within 1e-12; self BERTScore-F1 == 1.0 exactly",
    ):
        rng = random.Random(202)
        for _ in range(200):
            sentences = [
                [_random_vector(rng) for _ in range(rng.randint(1, 4))]
                for _ in range(rng.randint(1, 4))
            ]
            for words in sentences:
                mine = sentence_similarity(words)
                reference = oracles.sentence_similarity(words)
                if reference is None:
                    assert mine is None
                else:
                    assert mine == pytest.approx(reference, abs=1e-12)
            mine = intra_sample_similarity(sentences, ISSConfig())
            reference = oracles.intra_sample_similarity(sentences, 0.5, 1e-8)
            if reference is None:
                assert mine is None
            else:
                assert mine == pytest.approx(reference, abs=1e-12)

            candidate = [_random_vector(rng) for _ in range(rng.randint(1, 4))]
            reference_set = [_random_vector(rng) for _ in range(rng.randint(1, 4))]
            cand_emb = TokenEmbeddings(
                "c", tuple(f"t{i}" for i in range(len(candidate))),
                tuple(tuple(v) for v in candidate),
            )
            ref_emb = TokenEmbeddings(
                "r", tuple(f"t{i}" for i in range(len(reference_set))),
                tuple(tuple(v) for v in reference_set),
            )
            assert bertscore_f1(cand_emb, ref_emb) == pytest.approx(
                oracles.bertscore_f1(candidate, reference_set), abs=1e-12
            )

            unit_emb = TokenEmbeddings(
                "u", tuple(f"t{i}" for i in range(len(candidate))),
                tuple(_unit(v) for v in candidate),
            )
            assert bertscore_f1(unit_emb, unit_emb) == 1.0


# ---------------------------------------------------------------------------
# Statistics oracle suite


def test_statistics_match_committed_oracle_table(capsys):
    with criterion(
        capsys,
        "statistics: Welch t / CI match the committed 20-case oracle table within "
        "1e-6; BH hand case and 50 property checks hold",
    ):
        fixture = json.loads((FIXTURE_DIR / "stats_oracle.json").read_text(encoding="utf-8"))
        assert len(fixture["welch_cases"]) == 20
        for case in fixture["welch_cases"]:
            t, df, p = welch_t(case["a"], case["b"])
            lo, hi = mean_diff_ci(case["a"], case["b"])
            # The t statistic can be huge when variances are tiny, so it is
            # checked relatively; p-values and bounds use the contract bound.
            assert t == pytest.approx(case["t"], rel=1e-9)
            assert df == pytest.approx(case["df"], abs=1e-6)
            assert p == pytest.approx(case["p"], abs=1e-6)
            assert lo == pytest.approx(case["ci_low"], abs=1e-6)
            assert hi == pytest.approx(case["ci_high"], abs=1e-6)

        for point in fixture["t_cdf_grid"]:
            assert t_cdf(point["t"], point["df"]) == pytest.approx(point["cdf"], abs=1e-8)

        assert bh_adjust([0.01, 0.02, 0.03, 0.04]) == pytest.approx([0.04] * 4, abs=1e-12)

        rng = random.Random(55)
        for _ in range(50):
            p_values = [rng.random() for _ in range(rng.randint(1, 12))]
            adjusted = bh_adjust(p_values)
            assert adjusted == pytest.approx(oracles.bh_adjust(p_values), abs=1e-12)
            for raw, adj in zip(p_values, adjusted):
                # p*m/rank at rank == m can round one ulp below p itself.
                assert raw - 1e-12 <= adj <= 1.0
            order = sorted(range(len(p_values)), key=lambda i: p_values[i])
            for first, second in zip(order, order[1:]):
                assert adjusted[first] <= adjusted[second]


# ---------------------------------------------------------------------------
# Cleaning pipeline conformance


EXPECTED_STAGE_COUNTS = {
    "empty": 3,
    "empty_after_normalize": 2,
    "low_alnum": 4,
    "leak_phrase": 3,
    "ai_hashtag": 3,
    "too_short": 3,
    "duplicate": 2,
}


def test_pipeline_conformance_on_fixture_corpus(capsys):
    with criterion(
        capsys,
        "cleaning pipeline: 40-sample fixture yields exact per-stage counts, the "
        "closed-form rejection rate within 1e-9, and is idempotent",
    ):
        corpus = load_corpus(FIXTURE_DIR / "pipeline_fixture.csv")
        assert len(corpus) == 40
        processed, report = process_corpus(corpus)
        assert dict(report.per_stage_counts) == EXPECTED_STAGE_COUNTS
        assert report.original_length == 40
        assert report.processed_length == 20
        expected_rate = 100.0 * (40 - 20) / 40
        assert report.rejection_rate_pct == pytest.approx(expected_rate, abs=1e-9)

        again, second_report = process_corpus(processed)
        assert second_report.processed_length == second_report.original_length
        assert sum(second_report.per_stage_counts.values()) == 0
        assert [s.text for s in again.samples] == [s.text for s in processed.samples]


# ---------------------------------------------------------------------------
# Split integrity


def _random_paired_corpus(rng: random.Random) -> PairedCorpus:
    n_pairs = rng.randint(2, 25)
    n_lone_humans = rng.randint(0, 6)
    humans = [
        TextSample(f"h{i}", f"Plain message number {i}.", 0, "Human", "joy")
        for i in range(n_pairs + n_lone_humans)
    ]
    generated = [
        TextSample(f"g{i}", f"Rewritten message number {i}.", 1, "Mistral", "joy", pair_id=f"h{i}")
        for i in range(n_pairs)
    ]
    return pair_samples(humans, generated)


def test_split_integrity(capsys):
    with criterion(
        capsys,
        "splits: 1000 random paired corpora partition cleanly with pairs "
        "co-located; 4430 pairs at 0.8/0.1/0.1 give 3544/443/443",
    ):
        rng = random.Random(1000)
        for trial in range(1000):
            corpus = _random_paired_corpus(rng)
            assigned = split(corpus, SplitSpec(seed=trial))
            assert assigned.splits is not None
            assert set(assigned.splits) == {s.id for s in assigned.samples}
            for s in assigned.samples:
                if s.pair_id is not None:
                    assert assigned.splits[s.id] == assigned.splits[s.pair_id]

        humans = [
            TextSample(f"h{i:05d}", f"Plain message number {i}.", 0, "Human", "joy")
            for i in range(4430)
        ]
        generated = [
            TextSample(
                f"g{i:05d}", f"Rewritten message number {i}.", 1, "Mistral", "joy",
                pair_id=f"h{i:05d}",
            )
            for i in range(4430)
        ]
        corpus = pair_samples(humans, generated)
        assigned = split(corpus, SplitSpec(ratios=(0.8, 0.1, 0.1), seed=0))
        pair_split_counts = {"train": 0, "validation": 0, "test": 0}
        assert assigned.splits is not None
        for s in assigned.samples:
            if s.label == 0:
                pair_split_counts[assigned.splits[s.id]] += 1
        assert pair_split_counts == {"train": 3544, "validation": 443, "test": 443}


# ---------------------------------------------------------------------------
# Detector scoring


def test_detector_scoring_matches_brute_force(capsys):
    with criterion(
        capsys,
        "detector scoring: all 2^k labelings (k <= 10) match brute force; "
        "soft-voting identical runs changes nothing; tp4/fp1/tn3/fn2 MCC "
        "within 1e-4 of 0.4082",
    ):
        rng = random.Random(2046)
        for k in range(1, 11):
            ids = [f"s{i}" for i in range(k)]
            entries = {}
            for sid in ids:
                p1 = rng.random()
                entries[sid] = (1.0 - p1, p1)
            run = PredictionRun("run", "det", entries)
            for mask in range(2**k):
                labels = []
                for i, sid in enumerate(ids):
                    label = (mask >> i) & 1
                    source = "Mistral" if label else "Human"
                    labels.append(TextSample(sid, f"Message {i}.", label, source, "joy"))
                corpus = PairedCorpus(tuple(labels))
                mine = confusion_metrics(run, corpus)
                pairs = [
                    (1 if entries[s.id][1] > entries[s.id][0] else 0, s.label)
                    for s in corpus.samples
                ]
                reference = oracles.confusion_metrics(pairs)
                assert mine.keys() == reference.keys()
                for name in mine:
                    assert mine[name] == pytest.approx(reference[name], abs=1e-12)

        entries = {f"s{i}": ((1.0 - p), p) for i, p in ((i, rng.random()) for i in range(8))}
        run = PredictionRun("r1", "det", entries)
        labels = PairedCorpus(
            tuple(
                TextSample(
                    sid,
                    f"Message {i}.",
                    i % 2,
                    "Mistral" if i % 2 else "Human",
                    "joy",
                )
                for i, sid in enumerate(entries)
            )
        )
        voted = soft_vote([run, run, run])
        assert confusion_metrics(voted, labels) == confusion_metrics(run, labels)

        mcc = metrics_from_counts(ConfusionCounts(tp=4, fp=1, tn=3, fn=2))["mcc"]
        assert mcc == pytest.approx(0.4082, abs=1e-4)


# ---------------------------------------------------------------------------
# Performance


def _synthetic_corpus(n: int) -> PairedCorpus:
    rng = random.Random(10_000)
    sources = ("Human", "Mistral", "Qwen2-Dolphin")
    openers = ("Today", "Honestly", "Somehow", "Finally", "Yesterday")
    middles = ("the long meeting", "our quiet street", "that odd song", "a warm meal")
    ends = ("made me smile", "felt endless", "kept me thinking", "woke everyone up")
    samples = []
    for i in range(n):
        source = sources[i % 3]
        sentences = [
            f"{rng.choice(openers)} {rng.choice(middles)} {rng.choice(ends)}."
            for _ in range(rng.randint(1, 3))
        ]
        samples.append(
            TextSample(
                f"s{i:05d}",
                " ".join(sentences),
                0 if source == "Human" else 1,
                source,
                "joy",
            )
        )
    return PairedCorpus(tuple(samples))


def test_full_pass_over_ten_thousand_samples(capsys, tmp_path):
    with criterion(
        capsys,
        "performance: metrics + stylometry + comparisons over 10,000 samples in "
        "< 60 s single-threaded; parallel outputs byte-identical",
    ):
        corpus = _synthetic_corpus(10_000)
        group_map = {"Human": "Human", "Mistral": "Censored", "Qwen2-Dolphin": "Uncensored"}
        cfg = LexicalConfig()

        start = time.perf_counter()
        records = _lexical_records(corpus, cfg, jobs=1)
        stylo_rows = _stylometry_rows(corpus, cfg.mttr_window, jobs=1)
        results = compare_all(group_metric_values(records, corpus, group_map))
        elapsed = time.perf_counter() - start
        assert elapsed < 60.0
        assert len(results) == 12  # four lexical metrics, three group pairs

        save_metrics(records, tmp_path / "metrics_serial.jsonl")
        save_stylometry(stylo_rows, tmp_path / "stylometry_serial.jsonl")

        parallel_records = _lexical_records(corpus, cfg, jobs=2)
        parallel_rows = _stylometry_rows(corpus, cfg.mttr_window, jobs=2)
        save_metrics(parallel_records, tmp_path / "metrics_parallel.jsonl")
        save_stylometry(parallel_rows, tmp_path / "stylometry_parallel.jsonl")

        assert (
            (tmp_path / "metrics_serial.jsonl").read_bytes()
            == (tmp_path / "metrics_parallel.jsonl").read_bytes()
        )
        assert (
            (tmp_path / "stylometry_serial.jsonl").read_bytes()
            == (tmp_path / "stylometry_parallel.jsonl").read_bytes()
        )
        parallel_results = compare_all(group_metric_values(parallel_records, corpus, group_map))
        assert parallel_results == results
