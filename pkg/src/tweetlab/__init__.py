"""Corpus pipeline and quality-analysis toolkit for paired human/machine
short-text datasets: cleaning, lexical/embedding/stylometric metrics, group
statistics, and detector evaluation."""

__version__ = "0.1.0"

from .corpus import (
    CorpusError,
    MetricValue,
    PairedCorpus,
    PredictionRun,
    TextSample,
    TokenEmbeddings,
    ToxicityScores,
    load_corpus,
    load_embeddings,
    load_metrics,
    load_predictions,
    load_toxicity,
    save_corpus,
    save_embeddings,
    save_metrics,
    save_predictions,
    save_toxicity,
    validate,
)
from .dataset import SplitSpec, downsample, pair_samples, render_prompt, split
from .embedding import (
    ISSConfig,
    bertscore_f1,
    cosine,
    intra_sample_similarity,
    sentence_similarity,
)
from .evaluation import (
    ConfusionCounts,
    EvalReport,
    aggregate_runs,
    aggregate_toxicity,
    confusion_metrics,
    soft_vote,
)
from .lexical import (
    LexicalConfig,
    mttr,
    ngram_diversity,
    ngram_entropy,
    tokenize,
    vocabulary_size,
)
from .postprocess import (
    PipelineConfig,
    RejectionReport,
    alnum_ratio,
    contains_leak,
    mask_entities,
    normalize,
    process_corpus,
    strip_ai_hashtags,
)
from .stats import (
    ComparisonResult,
    GroupSamples,
    bh_adjust,
    cohens_d,
    compare_groups,
    mean_diff_ci,
    welch_t,
)
from .stylometry import StyloVector, extract_stylometry, flesch_reading_ease, split_sentences

__all__ = [name for name in dir() if not name.startswith("_")]
