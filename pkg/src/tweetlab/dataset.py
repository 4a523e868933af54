"""Paired dataset construction: generation-prompt rendering, human/generated
pairing, contamination-free splits assigned per pair unit, and cross-dataset
downsampling that keeps the human side identical everywhere."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace
from typing import Sequence

from .corpus import EMOTIONS, CorpusError, PairedCorpus, TextSample, filter_corpus, validate

PROMPT_TURNS = (
    (
        "user",
        "You are an AI assistant tasked with crafting tweets that convey the same "
        "emotion as the original tweet, which is {original_emotion}.",
    ),
    (
        "assistant",
        "Understood. Please share the original tweet. I'll generate a version that "
        "follows the provided guidelines.",
    ),
    (
        "user",
        "Original tweet: {text}\n"
        "Generate a complete tweet following these guidelines:\n"
        "- Expresses the same emotion as the original tweet ({original_emotion}) "
        "using creative and diverse linguistic techniques.\n"
        "- Substitutes the original tweet's words/phrases with semantically similar "
        "alternatives and varies the sentence structure.\n"
        "- Only return the generated tweet, refraining from using 'here's a tweet "
        "that conveys'.\n"
        "Generated tweet:",
    ),
)


@dataclass(frozen=True)
class SplitSpec:
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 0

    def __post_init__(self) -> None:
        if len(self.ratios) != 3 or any(r < 0 for r in self.ratios):
            raise ValueError("ratios must be three non-negative reals")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise ValueError("ratios must sum to 1")


def render_prompt_turns(text: str, emotion: str) -> list[tuple[str, str]]:
    """The three-turn generation dialogue with {original_emotion} and {text}
    substituted literally (no recursive templating)."""
    if emotion not in EMOTIONS:
        raise ValueError(f"unknown emotion {emotion!r}")
    turns = []
    for role, template in PROMPT_TURNS:
        content = template.replace("{original_emotion}", emotion).replace("{text}", text)
        turns.append((role, content))
    return turns


def render_prompt(text: str, emotion: str) -> str:
    return "\n".join(
        f"{role.capitalize()}: {content}" for role, content in render_prompt_turns(text, emotion)
    )


def pair_samples(
    humans: Sequence[TextSample], generated: Sequence[TextSample]
) -> PairedCorpus:
    """Link each generated sample to the human sample named by its pair_id and
    set the reverse link; unmatched humans stay unpaired."""
    human_ids = {h.id for h in humans}
    for h in humans:
        if h.label != 0:
            raise CorpusError(f"sample {h.id!r} in the human list has label {h.label}")
    back_link: dict[str, str] = {}
    for g in generated:
        if g.label != 1:
            raise CorpusError(f"sample {g.id!r} in the generated list has label {g.label}")
        if g.pair_id is None:
            raise CorpusError(f"generated sample {g.id!r} names no origin human id")
        if g.pair_id not in human_ids:
            raise CorpusError(f"generated sample {g.id!r} references missing human id {g.pair_id!r}")
        if g.pair_id in back_link:
            raise CorpusError(
                f"generated samples {back_link[g.pair_id]!r} and {g.id!r} both reference "
                f"human id {g.pair_id!r}"
            )
        back_link[g.pair_id] = g.id
    samples = [
        replace(h, pair_id=back_link[h.id]) if h.id in back_link else replace(h, pair_id=None)
        for h in humans
    ]
    samples.extend(generated)
    return PairedCorpus(tuple(samples))


def _pair_units(corpus: PairedCorpus) -> list[tuple[str, ...]]:
    """Group samples into units that must share a split: connected components
    over pair links, keyed by their lexicographically smallest id."""
    by_id = corpus.sample_map()
    adjacency: dict[str, set[str]] = {s.id: set() for s in corpus.samples}
    for s in corpus.samples:
        if s.pair_id is not None and s.pair_id in by_id:
            adjacency[s.id].add(s.pair_id)
            adjacency[s.pair_id].add(s.id)
    units: list[tuple[str, ...]] = []
    seen: set[str] = set()
    for s in corpus.samples:
        if s.id in seen:
            continue
        stack = [s.id]
        component: list[str] = []
        seen.add(s.id)
        while stack:
            current = stack.pop()
            component.append(current)
            for neighbor in adjacency[current]:
                if neighbor not in seen:
                    seen.add(neighbor)
                    stack.append(neighbor)
        units.append(tuple(sorted(component)))
    return sorted(units, key=lambda unit: unit[0])


def split(corpus: PairedCorpus, spec: SplitSpec) -> PairedCorpus:
    """Assign every sample to train/validation/test.  Pair units move as a
    whole, so counterparts always share a split.  Validation and test sizes are
    floors of their ratios (in units); train takes the remainder."""
    problems = validate(corpus)
    if problems:
        raise CorpusError("; ".join(problems))
    units = _pair_units(corpus)
    rng = random.Random(spec.seed)
    rng.shuffle(units)
    n_units = len(units)
    n_val = math.floor(spec.ratios[1] * n_units)
    n_test = math.floor(spec.ratios[2] * n_units)
    n_train = n_units - n_val - n_test
    splits: dict[str, str] = {}
    for index, unit in enumerate(units):
        if index < n_train:
            name = "train"
        elif index < n_train + n_val:
            name = "validation"
        else:
            name = "test"
        for sample_id in unit:
            splits[sample_id] = name
    return PairedCorpus(corpus.samples, splits)


def _paired_human_ids(corpus: PairedCorpus) -> set[str]:
    by_id = corpus.sample_map()
    out = set()
    for s in corpus.samples:
        if s.label == 0 and s.pair_id is not None:
            counterpart = by_id.get(s.pair_id)
            if counterpart is not None and counterpart.pair_id == s.id:
                out.add(s.id)
    return out


def downsample(datasets: Sequence[PairedCorpus], seed: int) -> list[PairedCorpus]:
    """Reduce every dataset to the same seeded selection of complete pairs.

    The selection is drawn from human ids paired in every dataset, sized to the
    smallest dataset's pair count, so all outputs have equal pair counts and an
    identical human-id set.  A single dataset passes through unchanged.
    """
    if not datasets:
        raise ValueError("downsample requires at least one dataset")
    if len(datasets) == 1:
        return [datasets[0]]
    per_dataset_ids = [_paired_human_ids(c) for c in datasets]
    eligible = sorted(set.intersection(*per_dataset_ids))
    target = min(min(len(ids) for ids in per_dataset_ids), len(eligible))
    rng = random.Random(seed)
    chosen = set(rng.sample(eligible, target))
    out: list[PairedCorpus] = []
    for corpus in datasets:
        by_id = corpus.sample_map()
        keep: set[str] = set()
        for human_id in chosen:
            keep.add(human_id)
            keep.add(by_id[human_id].pair_id)  # type: ignore[arg-type]
        out.append(filter_corpus(corpus, keep))
    return out
