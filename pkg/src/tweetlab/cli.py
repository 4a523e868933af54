"""Command-line interface: per-stage subcommands plus a config-driven full
pipeline runner with per-stage manifests and byte-identical reruns.

Exit codes: 0 success, 1 data error, 2 config error, 3 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import multiprocessing
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from . import __version__
from .corpus import (
    CorpusError,
    MetricValue,
    PairedCorpus,
    PredictionRun,
    load_corpus,
    load_embeddings,
    load_metrics,
    load_predictions,
    load_toxicity,
    save_corpus,
    save_metrics,
)
from .dataset import SplitSpec, downsample, pair_samples, split
from .embedding import ISSConfig, compute_embedding_metrics
from .evaluation import (
    EVAL_METRICS,
    EvalReport,
    aggregate_runs,
    aggregate_toxicity,
    confusion_metrics,
    format_mean_sd,
    soft_vote,
)
from .lexical import LEXICAL_METRICS, LexicalConfig, compute_lexical
from .lexical import (
    mttr as _mttr,
    ngram_diversity as _ngram_diversity,
    ngram_entropy as _ngram_entropy,
    tokenize as _tokenize,
    vocabulary_size as _vocabulary_size,
)
from .postprocess import ConfigError, PipelineConfig, RejectionReport, process_corpus
from .stats import (
    DEFAULT_GROUP_MAP,
    GROUPS,
    ComparisonResult,
    compare_all,
    group_metric_values,
)
from .stylometry import STYLO_FIELDS, compute_stylometry, extract_stylometry, save_stylometry

EXIT_OK = 0
EXIT_DATA = 1
EXIT_CONFIG = 2
EXIT_INTERNAL = 3


class StageError(Exception):
    """Wraps a failure inside a named pipeline stage."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


# ---------------------------------------------------------------------------
# Shared helpers


def _write_jsonl(records: Iterable[Mapping[str, Any]], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def _write_text(text: str, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _num(x: float | None) -> float | None:
    # JSON has no NaN/inf literal; degenerate statistics serialize as null.
    if x is None or not math.isfinite(x):
        return None
    return x


def _load_json(path: Path, what: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} {path}: invalid JSON ({exc.msg})") from None


def _pipeline_config(overrides: Mapping[str, Any] | None) -> PipelineConfig:
    if not overrides:
        return PipelineConfig()
    known = {
        "min_length_chars",
        "min_alnum_ratio",
        "leak_phrases",
        "ai_hashtags",
        "hashtag_reject_threshold",
        "contraction_map",
    }
    unknown = set(overrides) - known
    if unknown:
        raise ConfigError(f"unknown pipeline config key(s): {', '.join(sorted(unknown))}")
    kwargs: dict[str, Any] = dict(overrides)
    for key in ("leak_phrases", "ai_hashtags"):
        if key in kwargs:
            kwargs[key] = tuple(str(v) for v in kwargs[key])
    return PipelineConfig(**kwargs)


def _check_group_map(corpus: PairedCorpus, group_map: Mapping[str, str]) -> None:
    for source in sorted({s.source for s in corpus.samples}):
        if source not in group_map:
            raise ConfigError(f"no group assigned for source {source!r}")
    for source, group in group_map.items():
        if group not in GROUPS:
            raise ConfigError(f"group map assigns unknown group {group!r} to source {source!r}")


def _rejection_record(report: RejectionReport, name: str | None = None) -> dict[str, Any]:
    record: dict[str, Any] = {}
    if name is not None:
        record["input"] = name
    record.update(
        {
            "original_length": report.original_length,
            "processed_length": report.processed_length,
            "rejection_rate_pct": report.rejection_rate_pct,
            "per_stage_counts": dict(report.per_stage_counts),
        }
    )
    return record


# ---------------------------------------------------------------------------
# Parallel metric workers (top-level so they can be pickled)


def _lexical_worker(payload: tuple[str, int, int]) -> tuple[float | None, ...]:
    text, window, n = payload
    tokens = _tokenize(text)
    return (
        float(_vocabulary_size(tokens)),
        _mttr(tokens, window),
        _ngram_diversity(tokens, n),
        _ngram_entropy(tokens, n),
    )


def _stylometry_worker(payload: tuple[str, int]):
    text, window = payload
    return extract_stylometry(text, window)


def _parallel_map(worker, payloads: list, jobs: int) -> list:
    if jobs <= 1 or len(payloads) < 2:
        return [worker(p) for p in payloads]
    chunksize = max(1, len(payloads) // (jobs * 8))
    with multiprocessing.Pool(jobs) as pool:
        return pool.map(worker, payloads, chunksize=chunksize)


def _lexical_records(corpus: PairedCorpus, cfg: LexicalConfig, jobs: int) -> list[MetricValue]:
    if jobs <= 1:
        return compute_lexical(corpus, cfg)
    payloads = [(s.text, cfg.mttr_window, cfg.ngram_n) for s in corpus.samples]
    rows = _parallel_map(_lexical_worker, payloads, jobs)
    out: list[MetricValue] = []
    for s, values in zip(corpus.samples, rows):
        for name, value in zip(LEXICAL_METRICS, values):
            out.append(MetricValue(s.id, name, value))
    return out


def _stylometry_rows(corpus: PairedCorpus, window: int, jobs: int):
    if jobs <= 1:
        return compute_stylometry(corpus, window)
    payloads = [(s.text, window) for s in corpus.samples]
    vectors = _parallel_map(_stylometry_worker, payloads, jobs)
    return list(zip((s.id for s in corpus.samples), vectors))


# ---------------------------------------------------------------------------
# Table renderers


def _render_table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [len(h) for h in header]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(header)).rstrip(),
        "  ".join("-" * widths[i] for i in range(len(header))),
    ]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines) + "\n"


def _fmt(x: float, spec: str = ".3f") -> str:
    if x != x:
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, spec)


def _render_compare_table(results: Sequence[ComparisonResult]) -> str:
    header = ("Metric", "Comparison", "Group A", "Group B", "t", "df", "p(adj)", "d", "95% CI", "Sig")
    rows = []
    for r in results:
        rows.append(
            (
                r.metric_name,
                f"{r.group_a} vs {r.group_b}",
                format_mean_sd(r.mean_a, r.sd_a),
                format_mean_sd(r.mean_b, r.sd_b),
                _fmt(r.t_stat),
                _fmt(r.df, ".1f"),
                _fmt(r.p_adjusted, ".3g"),
                _fmt(r.cohens_d),
                f"[{_fmt(r.ci_low)}, {_fmt(r.ci_high)}]",
                r.stars,
            )
        )
    return _render_table(header, rows)


def _render_eval_table(reports: Sequence[EvalReport]) -> str:
    header = ("Detector", "Runs") + tuple(m.capitalize() if m != "mcc" else "MCC" for m in EVAL_METRICS)
    rows = []
    for report in reports:
        cells = [report.detector_name, str(report.n_runs)]
        for metric in EVAL_METRICS:
            mean, sd = report.metrics[metric]
            cells.append(format_mean_sd(mean, sd))
        rows.append(tuple(cells))
    return _render_table(header, rows)


def _render_toxicity_table(table: Mapping[str, Mapping[str, float]]) -> str:
    categories = next(iter(table.values())).keys() if table else ()
    header = ("Group",) + tuple(categories)
    rows = [
        (group,) + tuple(f"{row[c]:.2f}" for c in categories) for group, row in table.items()
    ]
    return _render_table(header, rows)


def _comparison_record(r: ComparisonResult) -> dict[str, Any]:
    return {
        "metric_name": r.metric_name,
        "group_a": r.group_a,
        "group_b": r.group_b,
        "n_a": r.n_a,
        "n_b": r.n_b,
        "mean_a": _num(r.mean_a),
        "sd_a": _num(r.sd_a),
        "mean_b": _num(r.mean_b),
        "sd_b": _num(r.sd_b),
        "t_stat": _num(r.t_stat),
        "df": _num(r.df),
        "p_raw": _num(r.p_raw),
        "p_adjusted": _num(r.p_adjusted),
        "cohens_d": _num(r.cohens_d),
        "ci_low": _num(r.ci_low),
        "ci_high": _num(r.ci_high),
        "stars": r.stars,
    }


def _eval_record(report: EvalReport) -> dict[str, Any]:
    return {
        "detector_name": report.detector_name,
        "n_runs": report.n_runs,
        "metrics": {
            name: {"mean": mean, "sd": sd} for name, (mean, sd) in report.metrics.items()
        },
    }


# ---------------------------------------------------------------------------
# Subcommands


def cmd_process(args: argparse.Namespace) -> int:
    overrides = _load_json(Path(args.config), "config file") if args.config else None
    if overrides is not None and not isinstance(overrides, dict):
        raise ConfigError(f"config file {args.config}: expected a JSON object")
    cfg = _pipeline_config(overrides)
    corpus = load_corpus(args.infile)
    processed, report = process_corpus(corpus, cfg)
    save_corpus(processed, args.outfile)
    _write_jsonl([_rejection_record(report)], Path(args.report))
    print(
        f"processed {report.original_length} -> {report.processed_length} samples "
        f"(rejection rate {report.rejection_rate_pct:.2f}%)"
    )
    return EXIT_OK


def _parse_ratios(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(f"ratios must be three comma-separated numbers, got {text!r}")
    try:
        values = tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"ratios must be numbers, got {text!r}") from None
    return values  # type: ignore[return-value]


def cmd_build_dataset(args: argparse.Namespace) -> int:
    try:
        spec = SplitSpec(ratios=_parse_ratios(args.ratios), seed=args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    human_corpus = load_corpus(args.human)
    humans = list(human_corpus.samples)
    datasets: list[tuple[str, PairedCorpus]] = []
    for path_str in args.generated:
        # Generated files may ship their human rows too; pair only label-1 rows.
        generated = [g for g in load_corpus(path_str).samples if g.label == 1]
        datasets.append((Path(path_str).name, pair_samples(humans, generated)))
    corpora = [c for _, c in datasets]
    if args.downsample and len(corpora) > 1:
        corpora = downsample(corpora, args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for (name, _), corpus in zip(datasets, corpora):
        assigned = split(corpus, spec)
        out_path = out_dir / name
        save_corpus(assigned, out_path)
        counts = {name_: 0 for name_ in ("train", "validation", "test")}
        for split_name in (assigned.splits or {}).values():
            counts[split_name] += 1
        print(
            f"{out_path}: {len(assigned)} samples "
            f"(train {counts['train']}, validation {counts['validation']}, test {counts['test']})"
        )
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace) -> int:
    try:
        cfg = LexicalConfig(mttr_window=args.mttr_window, ngram_n=args.ngram)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    corpus = load_corpus(args.infile)
    records = _lexical_records(corpus, cfg, args.jobs)
    save_metrics(records, args.outfile)
    print(f"wrote {len(records)} metric records for {len(corpus)} samples")
    return EXIT_OK


def cmd_metrics_embed(args: argparse.Namespace) -> int:
    try:
        cfg = ISSConfig(theta=args.theta, epsilon=args.epsilon)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    corpus = load_corpus(args.infile)
    embeddings = load_embeddings(args.embeddings)
    records = compute_embedding_metrics(corpus, embeddings, cfg, paired=args.paired)
    save_metrics(records, args.outfile)
    print(f"wrote {len(records)} metric records for {len(corpus)} samples")
    return EXIT_OK


def cmd_stylometry(args: argparse.Namespace) -> int:
    if args.mttr_window < 1:
        raise ConfigError("mttr-window must be >= 1")
    corpus = load_corpus(args.infile)
    rows = _stylometry_rows(corpus, args.mttr_window, args.jobs)
    save_stylometry(rows, args.outfile)
    print(f"wrote {len(rows)} stylometry records")
    return EXIT_OK


def _load_group_map(path_str: str | None) -> dict[str, str]:
    if path_str is None:
        return dict(DEFAULT_GROUP_MAP)
    raw = _load_json(Path(path_str), "group map")
    if not isinstance(raw, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in raw.items()
    ):
        raise ConfigError(f"group map {path_str}: expected an object of source -> group strings")
    return raw


def cmd_compare(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    group_map = _load_group_map(args.group_map)
    _check_group_map(corpus, group_map)
    records: list[MetricValue] = []
    for path_str in args.metrics:
        records.extend(load_metrics(path_str))
    grouped = group_metric_values(records, corpus, group_map)
    results = compare_all(grouped, family=args.family)
    _write_jsonl([_comparison_record(r) for r in results], Path(args.outfile))
    table = _render_compare_table(results)
    table_path = Path(args.table) if args.table else Path(args.outfile).with_suffix(".txt")
    _write_text(table, table_path)
    print(f"wrote {len(results)} comparisons to {args.outfile} (table: {table_path})")
    return EXIT_OK


def _evaluate_runs(
    runs: Sequence[PredictionRun], labels: PairedCorpus, ensemble: bool
) -> list[EvalReport]:
    by_detector: dict[str, list[PredictionRun]] = {}
    for run in runs:
        by_detector.setdefault(run.detector_name, []).append(run)
    reports: list[EvalReport] = []
    for detector_name, detector_runs in by_detector.items():
        metric_records = [confusion_metrics(run, labels) for run in detector_runs]
        reports.append(aggregate_runs(metric_records, detector_name))
        if ensemble and len(detector_runs) > 1:
            voted = soft_vote(detector_runs, run_id=f"{detector_name}-ensemble")
            reports.append(aggregate_runs([confusion_metrics(voted, labels)], voted.detector_name))
    return reports


def cmd_eval(args: argparse.Namespace) -> int:
    labels = load_corpus(args.labels)
    runs = [load_predictions(p) for p in args.predictions]
    reports = _evaluate_runs(runs, labels, args.ensemble)
    _write_jsonl([_eval_record(r) for r in reports], Path(args.outfile))
    table = _render_eval_table(reports)
    table_path = Path(args.table) if args.table else Path(args.outfile).with_suffix(".txt")
    _write_text(table, table_path)
    print(f"wrote {len(reports)} detector reports to {args.outfile} (table: {table_path})")
    return EXIT_OK


def _toxicity_grouping(corpus: PairedCorpus, group_map: Mapping[str, str] | None) -> dict[str, str]:
    # Group rows follow the canonical source order; identity grouping (per
    # source) when no map is given.
    grouping: dict[str, str] = {}
    from .corpus import SOURCES

    for source in SOURCES:
        for s in corpus.samples:
            if s.source != source:
                continue
            grouping[s.id] = group_map[source] if group_map is not None else source
    return grouping


def cmd_toxicity(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    scores = load_toxicity(args.scores)
    group_map = None
    if args.group_map is not None:
        group_map = _load_group_map(args.group_map)
        _check_group_map(corpus, group_map)
    if not 0.0 <= args.threshold <= 1.0:
        raise ConfigError("threshold must be in [0, 1]")
    grouping = _toxicity_grouping(corpus, group_map)
    table = aggregate_toxicity(scores, grouping, threshold=args.threshold)
    _write_jsonl(
        [{"group": group, "percentages": row} for group, row in table.items()],
        Path(args.outfile),
    )
    rendered = _render_toxicity_table(table)
    table_path = Path(args.table) if args.table else Path(args.outfile).with_suffix(".txt")
    _write_text(rendered, table_path)
    print(f"wrote toxicity percentages for {len(table)} groups to {args.outfile}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Config-driven full pipeline


_RUN_KEYS = {
    "seed",
    "out_dir",
    "inputs",
    "pipeline",
    "split",
    "lexical",
    "iss",
    "group_map",
    "family",
    "toxicity_threshold",
    "ensemble",
    "downsample",
    "jobs",
}
_INPUT_KEYS = {"human", "generated", "embeddings", "predictions", "toxicity"}


def _resolve_run_config(raw: Any, config_dir: Path, seed_override: int | None) -> dict[str, Any]:
    if not isinstance(raw, dict):
        raise ConfigError("run config must be a JSON object")
    unknown = set(raw) - _RUN_KEYS
    if unknown:
        raise ConfigError(f"unknown run config key(s): {', '.join(sorted(unknown))}")
    for key in ("out_dir", "inputs"):
        if key not in raw:
            raise ConfigError(f"run config missing required key {key!r}")
    inputs = raw["inputs"]
    if not isinstance(inputs, dict):
        raise ConfigError("run config 'inputs' must be an object")
    unknown = set(inputs) - _INPUT_KEYS
    if unknown:
        raise ConfigError(f"unknown input key(s): {', '.join(sorted(unknown))}")
    if "human" not in inputs or not inputs["human"]:
        raise ConfigError("run config needs inputs.human")
    generated = inputs.get("generated")
    if not isinstance(generated, list) or not generated:
        raise ConfigError("run config needs a non-empty inputs.generated list")
    predictions = inputs.get("predictions") or []
    if not isinstance(predictions, list):
        raise ConfigError("inputs.predictions must be a list of prediction files")
    for key in ("human", "embeddings", "toxicity"):
        if inputs.get(key) is not None and not isinstance(inputs[key], str):
            raise ConfigError(f"inputs.{key} must be a single path string")

    config = {
        "seed": int(raw.get("seed", 0)),
        "out_dir": str(raw["out_dir"]),
        "inputs": {
            "human": str(inputs["human"]),
            "generated": [str(g) for g in generated],
            "embeddings": str(inputs["embeddings"]) if inputs.get("embeddings") else None,
            "predictions": [str(p) for p in predictions],
            "toxicity": str(inputs["toxicity"]) if inputs.get("toxicity") else None,
        },
        "pipeline": dict(raw.get("pipeline") or {}),
        "split": {"ratios": list((raw.get("split") or {}).get("ratios", (0.8, 0.1, 0.1)))},
        "lexical": dict(raw.get("lexical") or {}),
        "iss": dict(raw.get("iss") or {}),
        "group_map": dict(raw.get("group_map") or DEFAULT_GROUP_MAP),
        "family": str(raw.get("family", "per-metric")),
        "toxicity_threshold": float(raw.get("toxicity_threshold", 0.5)),
        "ensemble": bool(raw.get("ensemble", False)),
        "downsample": bool(raw.get("downsample", True)),
        "jobs": int(raw.get("jobs", 1)),
    }
    if seed_override is not None:
        config["seed"] = seed_override
    if config["family"] not in ("per-metric", "joint"):
        raise ConfigError(f"unknown family scope {config['family']!r}")
    if not 0.0 <= config["toxicity_threshold"] <= 1.0:
        raise ConfigError("toxicity_threshold must be in [0, 1]")
    config["_config_dir"] = str(config_dir)
    return config


def _in_path(config: Mapping[str, Any], path_str: str) -> Path:
    # Relative input paths resolve against the config file's directory.
    path = Path(path_str)
    return path if path.is_absolute() else Path(config["_config_dir"]) / path


def _config_hash(config: Mapping[str, Any]) -> str:
    public = {k: v for k, v in config.items() if not k.startswith("_")}
    canonical = json.dumps(public, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _write_manifest(
    out_dir: Path,
    stage: str,
    config_hash: str,
    seed: int,
    inputs: Sequence[str],
    outputs: Sequence[str],
) -> None:
    record = {
        "stage": stage,
        "seed": seed,
        "config_sha256": config_hash,
        "inputs": list(inputs),
        "outputs": list(outputs),
    }
    path = out_dir / "manifests" / f"{stage}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    _write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", path)


def run_pipeline(config: Mapping[str, Any]) -> int:
    out_dir = _in_path(config, config["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    config_hash = _config_hash(config)
    seed = config["seed"]
    try:
        pipeline_cfg = _pipeline_config(config["pipeline"])
        lexical_cfg = LexicalConfig(**config["lexical"])
        iss_cfg = ISSConfig(**config["iss"])
        split_spec = SplitSpec(ratios=tuple(config["split"]["ratios"]), seed=seed)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    group_map = config["group_map"]

    # --- stage: process ---------------------------------------------------
    stage = "process"
    try:
        human_path = _in_path(config, config["inputs"]["human"])
        human_raw = load_corpus(human_path)
        processed_human, human_report = process_corpus(human_raw, pipeline_cfg)
        processed_dir = out_dir / "processed"
        processed_dir.mkdir(parents=True, exist_ok=True)
        human_out = processed_dir / Path(config["inputs"]["human"]).name
        save_corpus(processed_human, human_out)
        reports = [_rejection_record(human_report, Path(config["inputs"]["human"]).name)]
        processed_generated: list[tuple[str, PairedCorpus]] = []
        gen_outputs: list[str] = []
        for gen_str in config["inputs"]["generated"]:
            gen_raw = load_corpus(_in_path(config, gen_str))
            processed_gen, gen_report = process_corpus(gen_raw, pipeline_cfg)
            name = Path(gen_str).name
            gen_out = processed_dir / name
            save_corpus(processed_gen, gen_out)
            processed_generated.append((name, processed_gen))
            gen_outputs.append(str(gen_out.relative_to(out_dir)))
            reports.append(_rejection_record(gen_report, name))
        report_path = out_dir / "reports" / "rejection.jsonl"
        _write_jsonl(reports, report_path)
        _write_manifest(
            out_dir,
            stage,
            config_hash,
            seed,
            [config["inputs"]["human"], *config["inputs"]["generated"]],
            [str(human_out.relative_to(out_dir)), *gen_outputs, str(report_path.relative_to(out_dir))],
        )
    except Exception as exc:
        raise StageError(stage, exc) from exc

    # --- stage: build -----------------------------------------------------
    stage = "build"
    try:
        human_ids = {s.id for s in processed_human.samples}
        datasets: list[tuple[str, PairedCorpus]] = []
        for name, gen_corpus in processed_generated:
            # Generated files may ship their human rows too; only label-1
            # samples carry origin references worth matching.
            generated_only = [g for g in gen_corpus.samples if g.label == 1]
            matched = [g for g in generated_only if g.pair_id in human_ids]
            dropped = len(generated_only) - len(matched)
            if dropped:
                print(f"{name}: dropped {dropped} generated sample(s) whose origin was rejected")
            datasets.append((name, pair_samples(list(processed_human.samples), matched)))
        corpora = [c for _, c in datasets]
        if config["downsample"] and len(corpora) > 1:
            corpora = downsample(corpora, seed)
        dataset_dir = out_dir / "datasets"
        dataset_dir.mkdir(parents=True, exist_ok=True)
        dataset_outputs: list[str] = []
        final_datasets: list[tuple[str, PairedCorpus]] = []
        for (name, _), corpus in zip(datasets, corpora):
            assigned = split(corpus, split_spec)
            save_corpus(assigned, dataset_dir / name)
            final_datasets.append((name, assigned))
            dataset_outputs.append(str((dataset_dir / name).relative_to(out_dir)))

        # Merged analysis pool: each surviving human once, all generated
        # samples, pair links cleared (several datasets may share one human).
        human_ids_used = {
            s.id for _, ds in final_datasets for s in ds.samples if s.label == 0
        }
        analysis_samples = [
            replace(s, pair_id=None)
            for s in processed_human.samples
            if s.id in human_ids_used
        ]
        for _, ds in final_datasets:
            analysis_samples.extend(replace(s, pair_id=None) for s in ds.samples if s.label == 1)
        analysis = PairedCorpus(tuple(analysis_samples))
        analysis_path = dataset_dir / "analysis.csv"
        save_corpus(analysis, analysis_path)
        dataset_outputs.append(str(analysis_path.relative_to(out_dir)))
        _write_manifest(
            out_dir,
            stage,
            config_hash,
            seed,
            [str(p) for p in gen_outputs] + [str(human_out.relative_to(out_dir))],
            dataset_outputs,
        )
    except StageError:
        raise
    except Exception as exc:
        raise StageError(stage, exc) from exc

    # --- stage: metrics ---------------------------------------------------
    stage = "metrics"
    try:
        records = _lexical_records(analysis, lexical_cfg, config["jobs"])
        embeddings_input = config["inputs"]["embeddings"]
        if embeddings_input:
            embeddings = load_embeddings(_in_path(config, embeddings_input))
            records.extend(compute_embedding_metrics(analysis, embeddings, iss_cfg, paired=False))
            for _, ds in final_datasets:
                paired_records = compute_embedding_metrics(ds, embeddings, iss_cfg, paired=True)
                records.extend(r for r in paired_records if r.metric_name == "bertscore_f1")
        metrics_path = out_dir / "metrics" / "metrics.jsonl"
        metrics_path.parent.mkdir(parents=True, exist_ok=True)
        save_metrics(records, metrics_path)
        metric_inputs = [str(analysis_path.relative_to(out_dir))]
        if embeddings_input:
            metric_inputs.append(embeddings_input)
        _write_manifest(
            out_dir, stage, config_hash, seed,
            metric_inputs, [str(metrics_path.relative_to(out_dir))],
        )
    except StageError:
        raise
    except Exception as exc:
        raise StageError(stage, exc) from exc

    # --- stage: stylometry ------------------------------------------------
    stage = "stylometry"
    try:
        rows = _stylometry_rows(analysis, lexical_cfg.mttr_window, config["jobs"])
        stylometry_path = out_dir / "metrics" / "stylometry.jsonl"
        save_stylometry(rows, stylometry_path)
        _write_manifest(
            out_dir, stage, config_hash, seed,
            [str(analysis_path.relative_to(out_dir))],
            [str(stylometry_path.relative_to(out_dir))],
        )
    except StageError:
        raise
    except Exception as exc:
        raise StageError(stage, exc) from exc

    # --- stage: compare ---------------------------------------------------
    stage = "compare"
    try:
        _check_group_map(analysis, group_map)
        grouped = group_metric_values(records, analysis, group_map)
        results = compare_all(grouped, family=config["family"])
        compare_path = out_dir / "compare" / "comparisons.jsonl"
        _write_jsonl([_comparison_record(r) for r in results], compare_path)
        table_path = out_dir / "compare" / "comparisons.txt"
        _write_text(_render_compare_table(results), table_path)
        _write_manifest(
            out_dir, stage, config_hash, seed,
            [str(metrics_path.relative_to(out_dir)), str(analysis_path.relative_to(out_dir))],
            [str(compare_path.relative_to(out_dir)), str(table_path.relative_to(out_dir))],
        )
    except StageError:
        raise
    except Exception as exc:
        raise StageError(stage, exc) from exc

    # --- stage: eval (optional) --------------------------------------------
    if config["inputs"]["predictions"]:
        stage = "eval"
        try:
            runs = [load_predictions(_in_path(config, p)) for p in config["inputs"]["predictions"]]
            reports = _evaluate_runs(runs, analysis, config["ensemble"])
            eval_path = out_dir / "eval" / "report.jsonl"
            _write_jsonl([_eval_record(r) for r in reports], eval_path)
            eval_table_path = out_dir / "eval" / "report.txt"
            _write_text(_render_eval_table(reports), eval_table_path)
            _write_manifest(
                out_dir, stage, config_hash, seed,
                [*config["inputs"]["predictions"], str(analysis_path.relative_to(out_dir))],
                [str(eval_path.relative_to(out_dir)), str(eval_table_path.relative_to(out_dir))],
            )
        except StageError:
            raise
        except Exception as exc:
            raise StageError(stage, exc) from exc

    # --- stage: toxicity (optional) -----------------------------------------
    if config["inputs"]["toxicity"]:
        stage = "toxicity"
        try:
            scores = load_toxicity(_in_path(config, config["inputs"]["toxicity"]))
            grouping = _toxicity_grouping(analysis, None)
            table = aggregate_toxicity(scores, grouping, threshold=config["toxicity_threshold"])
            tox_path = out_dir / "toxicity" / "report.jsonl"
            _write_jsonl(
                [{"group": group, "percentages": row} for group, row in table.items()], tox_path
            )
            tox_table_path = out_dir / "toxicity" / "report.txt"
            _write_text(_render_toxicity_table(table), tox_table_path)
            _write_manifest(
                out_dir, stage, config_hash, seed,
                [config["inputs"]["toxicity"], str(analysis_path.relative_to(out_dir))],
                [str(tox_path.relative_to(out_dir)), str(tox_table_path.relative_to(out_dir))],
            )
        except StageError:
            raise
        except Exception as exc:
            raise StageError(stage, exc) from exc

    print(f"run complete: artifacts in {out_dir}")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    config_path = Path(args.config)
    raw = _load_json(config_path, "run config")
    config = _resolve_run_config(raw, config_path.parent, args.seed)
    return run_pipeline(config)


# ---------------------------------------------------------------------------
# Parser and entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tweetlab",
        description="Corpus cleaning, quality metrics, and detector evaluation "
        "for paired human/machine short-text datasets.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("process", help="clean a corpus and report rejection counts")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--config", help="JSON file with pipeline config overrides")
    p.set_defaults(func=cmd_process)

    p = sub.add_parser("build-dataset", help="pair, downsample, and split datasets")
    p.add_argument("--human", required=True)
    p.add_argument("--generated", nargs="+", required=True)
    p.add_argument("--ratios", default="0.8,0.1,0.1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--no-downsample", dest="downsample", action="store_false")
    p.set_defaults(func=cmd_build_dataset)

    p = sub.add_parser("metrics", help="per-sample lexical metrics")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--mttr-window", type=int, default=10)
    p.add_argument("--ngram", type=int, default=2)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("metrics-embed", help="embedding-based metrics from an embedding file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--paired", action="store_true", help="also score generated-vs-human pairs")
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--epsilon", type=float, default=1e-8)
    p.set_defaults(func=cmd_metrics_embed)

    p = sub.add_parser("stylometry", help="per-sample stylometric feature vectors")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--mttr-window", type=int, default=10)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_stylometry)

    p = sub.add_parser("compare", help="three-way group comparisons over metric records")
    p.add_argument("--metrics", nargs="+", required=True)
    p.add_argument("--corpus", required=True, help="corpus supplying sample sources")
    p.add_argument("--group-map", help="JSON object mapping source -> group")
    p.add_argument("--family", choices=("per-metric", "joint"), default="per-metric")
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--table", help="path for the rendered table (default: out with .txt)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("eval", help="score detector prediction runs")
    p.add_argument("--predictions", nargs="+", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--ensemble", action="store_true", help="add per-detector soft-vote ensembles")
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--table", help="path for the rendered table (default: out with .txt)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("toxicity", help="per-group toxicity percentages")
    p.add_argument("--scores", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--group-map", help="JSON object mapping source -> group (default: per source)")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--table", help="path for the rendered table (default: out with .txt)")
    p.set_defaults(func=cmd_toxicity)

    p = sub.add_parser("run", help="run the full pipeline from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, help="override the config seed")
    p.set_defaults(func=cmd_run)

    return parser


def _classify(exc: Exception) -> tuple[int, str]:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG, "config error"
    if isinstance(exc, (CorpusError, FileNotFoundError, IsADirectoryError, PermissionError)):
        return EXIT_DATA, "data error"
    if isinstance(exc, (ValueError, KeyError)):
        return EXIT_DATA, "data error"
    return EXIT_INTERNAL, "internal error"


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        code, label = _classify(exc.cause)
        print(f"{label}: {exc}", file=sys.stderr)
        return code
    except Exception as exc:  # noqa: BLE001 - CLI boundary maps all failures
        code, label = _classify(exc)
        print(f"{label}: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
