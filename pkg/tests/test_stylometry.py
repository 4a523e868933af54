"""Stylometric feature tests against a hand-computed 25-text reference set."""

import json
import math

import pytest

from tweetlab.corpus import PairedCorpus, TextSample
from tweetlab.stylometry import (
    STYLO_FIELDS,
    StyloVector,
    compute_stylometry,
    count_syllables,
    extract_stylometry,
    flesch_reading_ease,
    save_stylometry,
    split_paragraphs,
    split_sentences,
)


def vec(**overrides):
    """A StyloVector expectation dict; unspecified fields default to zero."""
    base = {name: 0 for name in STYLO_FIELDS}
    for name in (
        "mean_word_length",
        "mean_words_per_sentence",
        "sd_words_per_sentence",
        "mean_words_per_paragraph",
        "sd_words_per_paragraph",
        "mean_sentences_per_paragraph",
        "sd_sentences_per_paragraph",
        "mttr",
        "flesch_reading_ease",
    ):
        base[name] = 0.0
    base.update(overrides)
    return base


# Every value below was computed by hand from the documented rules:
# tokens are lowercase [#@]?[\w'’]+ runs; sentences split after .!? before
# whitespace/end; paragraphs split on blank lines; SDs are population SDs;
# punct_total counts Unicode P* code points; syllables use the vowel-group
# heuristic with the trailing-silent-e subtraction.
HAND_CASES = [
    (
        "Go now!",
        vec(word_count=2, sentence_count=1, paragraph_count=1, mean_word_length=2.5,
            mean_words_per_sentence=2.0, mean_words_per_paragraph=2.0,
            mean_sentences_per_paragraph=1.0, punct_total=1, punct_exclaim=1,
            mttr=1.0, flesch_reading_ease=206.835 - 1.015 * 2 - 84.6 * 1),
    ),
    ("", vec()),
    (
        "a b. c d.",
        vec(word_count=4, sentence_count=2, paragraph_count=1, mean_word_length=1.0,
            mean_words_per_sentence=2.0, mean_words_per_paragraph=4.0,
            mean_sentences_per_paragraph=2.0, punct_total=2,
            mttr=1.0, flesch_reading_ease=206.835 - 1.015 * 2 - 84.6 * 1),
    ),
    (
        "The cat sat.",
        vec(word_count=3, sentence_count=1, paragraph_count=1, mean_word_length=3.0,
            mean_words_per_sentence=3.0, mean_words_per_paragraph=3.0,
            mean_sentences_per_paragraph=1.0, punct_total=1,
            mttr=1.0, flesch_reading_ease=119.19),
    ),
    (
        "Hi. Bye!",
        vec(word_count=2, sentence_count=2, paragraph_count=1, mean_word_length=2.5,
            mean_words_per_sentence=1.0, mean_words_per_paragraph=2.0,
            mean_sentences_per_paragraph=2.0, punct_total=2, punct_exclaim=1,
            mttr=1.0, flesch_reading_ease=121.22),
    ),
    (
        "Wait... what?",
        vec(word_count=2, sentence_count=2, paragraph_count=1, mean_word_length=4.0,
            mean_words_per_sentence=1.0, mean_words_per_paragraph=2.0,
            mean_sentences_per_paragraph=2.0, punct_total=4, punct_question=1,
            mttr=1.0, flesch_reading_ease=121.22),
    ),
    (
        "#win @USER :smile:",
        vec(word_count=3, sentence_count=1, paragraph_count=1, mean_word_length=14 / 3,
            mean_words_per_sentence=3.0, mean_words_per_paragraph=3.0,
            mean_sentences_per_paragraph=1.0, punct_total=4, punct_colon=2,
            punct_at=1, punct_hash=1, mttr=1.0,
            flesch_reading_ease=206.835 - 1.015 * 3 - 84.6 * (4 / 3)),
    ),
    (
        "Hello world",
        vec(word_count=2, sentence_count=1, paragraph_count=1, mean_word_length=5.0,
            mean_words_per_sentence=2.0, mean_words_per_paragraph=2.0,
            mean_sentences_per_paragraph=1.0, mttr=1.0,
            flesch_reading_ease=206.835 - 1.015 * 2 - 84.6 * (3 / 2)),
    ),
    (
        "One two three. Four five.",
        vec(word_count=5, sentence_count=2, paragraph_count=1, mean_word_length=3.8,
            mean_words_per_sentence=2.5, sd_words_per_sentence=0.5,
            mean_words_per_paragraph=5.0, mean_sentences_per_paragraph=2.0,
            punct_total=2, mttr=1.0,
            flesch_reading_ease=206.835 - 1.015 * 2.5 - 84.6 * 1),
    ),
    (
        "Why? Because. Maybe!",
        vec(word_count=3, sentence_count=3, paragraph_count=1, mean_word_length=5.0,
            mean_words_per_sentence=1.0, mean_words_per_paragraph=3.0,
            mean_sentences_per_paragraph=3.0, punct_total=3, punct_exclaim=1,
            punct_question=1, mttr=1.0,
            flesch_reading_ease=206.835 - 1.015 * 1 - 84.6 * (4 / 3)),
    ),
    (
        "First para here.\n\nSecond para now!",
        vec(word_count=6, sentence_count=2, paragraph_count=2, mean_word_length=13 / 3,
            mean_words_per_sentence=3.0, mean_words_per_paragraph=3.0,
            mean_sentences_per_paragraph=1.0, punct_total=2, punct_exclaim=1,
            mttr=5 / 6, flesch_reading_ease=206.835 - 1.015 * 3 - 84.6 * (9 / 6)),
    ),
    (
        "I can't stop; won't stop!",
        vec(word_count=5, sentence_count=1, paragraph_count=1, mean_word_length=3.8,
            mean_words_per_sentence=5.0, mean_words_per_paragraph=5.0,
            mean_sentences_per_paragraph=1.0, punct_total=4, punct_exclaim=1,
            punct_semicolon=1, mttr=0.8,
            flesch_reading_ease=206.835 - 1.015 * 5 - 84.6 * 1),
    ),
    (
        "Email me: test@example.com; thanks!",
        vec(word_count=6, sentence_count=1, paragraph_count=1, mean_word_length=14 / 3,
            mean_words_per_sentence=6.0, mean_words_per_paragraph=6.0,
            mean_sentences_per_paragraph=1.0, punct_total=5, punct_exclaim=1,
            punct_colon=1, punct_semicolon=1, punct_at=1, mttr=1.0,
            flesch_reading_ease=206.835 - 1.015 * 6 - 84.6 * (8 / 6)),
    ),
    (
        "Numbers 123 and 456 count",
        vec(word_count=5, sentence_count=1, paragraph_count=1, mean_word_length=4.2,
            mean_words_per_sentence=5.0, mean_words_per_paragraph=5.0,
            mean_sentences_per_paragraph=1.0, mttr=1.0,
            flesch_reading_ease=206.835 - 1.015 * 5 - 84.6 * (6 / 5)),
    ),
    (
        "She sells sea shells. She sells more. Sea shells sell.",
        vec(word_count=10, sentence_count=3, paragraph_count=1, mean_word_length=4.2,
            mean_words_per_sentence=10 / 3, sd_words_per_sentence=math.sqrt(2) / 3,
            mean_words_per_paragraph=10.0, mean_sentences_per_paragraph=3.0,
            punct_total=3, mttr=0.6,
            flesch_reading_ease=206.835 - 1.015 * (10 / 3) - 84.6 * 1),
    ),
    (
        "Really? Are you sure? Yes!",
        vec(word_count=5, sentence_count=3, paragraph_count=1, mean_word_length=3.8,
            mean_words_per_sentence=5 / 3, sd_words_per_sentence=2 * math.sqrt(2) / 3,
            mean_words_per_paragraph=5.0, mean_sentences_per_paragraph=3.0,
            punct_total=3, punct_exclaim=1, punct_question=2, mttr=1.0,
            flesch_reading_ease=206.835 - 1.015 * (5 / 3) - 84.6 * (6 / 5)),
    ),
    (
        " ".join(["word"] * 12),
        vec(word_count=12, sentence_count=1, paragraph_count=1, mean_word_length=4.0,
            mean_words_per_sentence=12.0, mean_words_per_paragraph=12.0,
            mean_sentences_per_paragraph=1.0, mttr=0.1,
            flesch_reading_ease=206.835 - 1.015 * 12 - 84.6 * 1),
    ),
    (
        "Mix CASE TeXt mix case text",
        vec(word_count=6, sentence_count=1, paragraph_count=1, mean_word_length=11 / 3,
            mean_words_per_sentence=6.0, mean_words_per_paragraph=6.0,
            mean_sentences_per_paragraph=1.0, mttr=0.5,
            flesch_reading_ease=206.835 - 1.015 * 6 - 84.6 * 1),
    ),
    (
        "(parens) [brackets] {braces} - dash",
        vec(word_count=4, sentence_count=1, paragraph_count=1, mean_word_length=6.0,
            mean_words_per_sentence=4.0, mean_words_per_paragraph=4.0,
            mean_sentences_per_paragraph=1.0, punct_total=7, mttr=1.0,
            flesch_reading_ease=206.835 - 1.015 * 4 - 84.6 * (7 / 4)),
    ),
    (
        "Tweet with #tag1 #tag2 and @mention!",
        vec(word_count=6, sentence_count=1, paragraph_count=1, mean_word_length=5.0,
            mean_words_per_sentence=6.0, mean_words_per_paragraph=6.0,
            mean_sentences_per_paragraph=1.0, punct_total=4, punct_exclaim=1,
            punct_at=1, punct_hash=2, mttr=1.0,
            flesch_reading_ease=206.835 - 1.015 * 6 - 84.6 * (7 / 6)),
    ),
    (
        "One. Two here.\n\nThree four five!\n\nSix?",
        vec(word_count=7, sentence_count=4, paragraph_count=3, mean_word_length=26 / 7,
            mean_words_per_sentence=1.75, sd_words_per_sentence=math.sqrt(0.6875),
            mean_words_per_paragraph=7 / 3, sd_words_per_paragraph=2 * math.sqrt(2) / 3,
            mean_sentences_per_paragraph=4 / 3, sd_sentences_per_paragraph=math.sqrt(2) / 3,
            punct_total=4, punct_exclaim=1, punct_question=1, mttr=1.0,
            flesch_reading_ease=206.835 - 1.015 * 1.75 - 84.6 * 1),
    ),
    (
        "!!!",
        vec(sentence_count=1, paragraph_count=1, mean_sentences_per_paragraph=1.0,
            punct_total=3, punct_exclaim=3),
    ),
    (
        "Don't you think it's great? I'd say so.",
        vec(word_count=8, sentence_count=2, paragraph_count=1, mean_word_length=3.75,
            mean_words_per_sentence=4.0, sd_words_per_sentence=1.0,
            mean_words_per_paragraph=8.0, mean_sentences_per_paragraph=2.0,
            punct_total=5, punct_question=1, mttr=1.0,
            flesch_reading_ease=206.835 - 1.015 * 4 - 84.6 * 1),
    ),
    (
        "Readability example sentence.",
        vec(word_count=3, sentence_count=1, paragraph_count=1, mean_word_length=26 / 3,
            mean_words_per_sentence=3.0, mean_words_per_paragraph=3.0,
            mean_sentences_per_paragraph=1.0, punct_total=1, mttr=1.0,
            flesch_reading_ease=206.835 - 1.015 * 3 - 84.6 * 3),
    ),
    (
        "Queue audio eye",
        vec(word_count=3, sentence_count=1, paragraph_count=1, mean_word_length=13 / 3,
            mean_words_per_sentence=3.0, mean_words_per_paragraph=3.0,
            mean_sentences_per_paragraph=1.0, mttr=1.0,
            flesch_reading_ease=206.835 - 1.015 * 3 - 84.6 * (4 / 3)),
    ),
]


def test_reference_set_size():
    assert len(HAND_CASES) == 25


@pytest.mark.parametrize("text,expected", HAND_CASES, ids=range(len(HAND_CASES)))
def test_hand_computed_vectors(text, expected):
    got = extract_stylometry(text)
    for name in STYLO_FIELDS:
        value = getattr(got, name)
        want = expected[name]
        if isinstance(want, int) and not isinstance(want, bool):
            assert value == want, name
        else:
            assert value == pytest.approx(want, abs=1e-9), name


# ---------------------------------------------------------------------------
# splitters and syllables


def test_split_sentences_examples():
    assert split_sentences("Hi. Bye!") == ["Hi.", "Bye!"]
    assert split_sentences("no terminator") == ["no terminator"]
    assert split_sentences("Wait... what?") == ["Wait...", "what?"]
    assert split_sentences("") == []


def test_split_sentences_delimiter_attaches_left():
    parts = split_sentences("One! Two? Three.")
    assert parts == ["One!", "Two?", "Three."]


def test_split_paragraphs():
    assert split_paragraphs("a\n\nb\n \nc") == ["a", "b", "c"]
    assert split_paragraphs("single line") == ["single line"]
    assert split_paragraphs("") == []


@pytest.mark.parametrize(
    "word,expected",
    [
        ("cat", 1), ("queue", 1), ("audio", 2), ("eye", 1), ("rhythm", 1),
        ("because", 2), ("example", 2), ("readability", 5), ("the", 1),
        ("xyz", 1), ("create", 1), ("agree", 2), ("idea", 2),
    ],
)
def test_count_syllables(word, expected):
    assert count_syllables(word) == expected


def test_flesch_examples():
    assert flesch_reading_ease("hi") == pytest.approx(121.22)
    assert flesch_reading_ease("The cat sat.") == pytest.approx(119.19)
    assert flesch_reading_ease("") is None
    assert flesch_reading_ease("?!") is None


# ---------------------------------------------------------------------------
# invariants


@pytest.mark.parametrize("text", [t for t, _ in HAND_CASES if t])
def test_word_count_consistency(text):
    got = extract_stylometry(text)
    assert got.word_count == round(got.mean_words_per_sentence * got.sentence_count, 6) or (
        got.sentence_count == 0
    )
    assert got.word_count == pytest.approx(
        got.mean_words_per_paragraph * got.paragraph_count
    ) or got.paragraph_count == 0
    six_marks = (
        got.punct_exclaim + got.punct_question + got.punct_colon
        + got.punct_semicolon + got.punct_at + got.punct_hash
    )
    assert got.punct_total >= six_marks


def test_exclaim_increment():
    base = extract_stylometry("Steady as she goes")
    more = extract_stylometry("Steady as she goes!")
    assert more.punct_exclaim == base.punct_exclaim + 1
    assert more.punct_total == base.punct_total + 1
    assert more.word_count == base.word_count


def test_mttr_window_parameter():
    got = extract_stylometry(" ".join(["word"] * 12), mttr_window=3)
    assert got.mttr == pytest.approx(1 / 3)


# ---------------------------------------------------------------------------
# corpus-level API


def test_compute_and_save_stylometry(tmp_path):
    corpus = PairedCorpus(
        (
            TextSample("h1", "Go now!", 0, "Human"),
            TextSample("g1", "Hi. Bye!", 1, "LL3"),
        )
    )
    rows = compute_stylometry(corpus)
    assert [sid for sid, _ in rows] == ["h1", "g1"]
    assert isinstance(rows[0][1], StyloVector)

    path = tmp_path / "stylo.jsonl"
    save_stylometry(rows, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 2
    rec = json.loads(lines[0])
    assert rec["sample_id"] == "h1"
    assert list(rec)[1:] == list(STYLO_FIELDS)
    assert rec["word_count"] == 2
