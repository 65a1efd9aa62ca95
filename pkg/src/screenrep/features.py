"""Per-movie female-representation features, Bechdel flags and ratio reports."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._io import write_csv
from .gender import normalize_name
from .text import PosCounts, tokenize

COLUMNS = (
    "genre1_tag_female",
    "genre2_tag_female",
    "genre3_tag_female",
    "female_cast_count",
    "female_dialogue_count",
    "female_crew_count",
    "sentiment_female",
    "noun_count_female",
    "verb_count_female",
    "adjective_count_female",
)

COLUMN_LABELS = {
    "genre1_tag_female": "Genre1 Tag Female",
    "genre2_tag_female": "Genre2 Tag Female",
    "genre3_tag_female": "Genre3 Tag Female",
    "female_cast_count": "Number of Female Cast",
    "female_dialogue_count": "Number of Female Dialogues",
    "female_crew_count": "Number of Female Crew",
    "sentiment_female": "Sentiment of Female",
    "noun_count_female": "Noun counts of Female",
    "verb_count_female": "Verb counts of Female",
    "adjective_count_female": "Adjective counts of Female",
}

MALE_REFERENCE = frozenset(
    ["he", "him", "his", "himself", "man", "men", "boyfriend", "husband", "father", "brother"]
)
NAMED_BLOCKLIST = frozenset(["woman", "girl", "waitress", "nurse", "mother"])


class AssemblyError(ValueError):
    pass


@dataclass
class MovieFeatureVector:
    movie_id: str
    genre1_tag_female: float | None = None
    genre2_tag_female: float | None = None
    genre3_tag_female: float | None = None
    female_cast_count: int = 0
    female_dialogue_count: int = 0
    female_crew_count: int = 0
    sentiment_female: float | None = None
    noun_count_female: int = 0
    verb_count_female: int = 0
    adjective_count_female: int = 0
    extra: dict = field(default_factory=dict)
    missing: list = field(default_factory=list)

    def values(self, extra_columns=()) -> list:
        return [getattr(self, c) for c in COLUMNS] + [self.extra.get(c) for c in extra_columns]


def _female_ids(bundle) -> set:
    return {c.character_id for c in bundle.characters if c.gender == "female"}


def build_feature_vector(bundle, genre_scores, pos_by_line: dict, sentiment_by_line: dict) -> MovieFeatureVector:
    """
    Totals over female-spoken lines; sentiment is the mean per-line score.

    Missing inputs (no female dialogue, fewer genre slots than three) leave
    the affected fields as None and record the reason in ``missing``.
    """
    females = _female_ids(bundle)
    female_lines = [ln for ln in bundle.lines if ln.character_id in females]
    vec = MovieFeatureVector(
        movie_id=bundle.movie_id,
        female_cast_count=len(females),
        female_dialogue_count=len(female_lines),
        female_crew_count=sum(1 for c in bundle.crew if c.gender == "female"),
    )
    pos = PosCounts()
    scores = []
    for ln in female_lines:
        pos = pos + pos_by_line.get(ln.line_id, PosCounts())
        s = sentiment_by_line.get(ln.line_id)
        if s is not None:
            scores.append(s.final)
    vec.noun_count_female = pos.nouns
    vec.verb_count_female = pos.verbs
    vec.adjective_count_female = pos.adjectives

    if not female_lines:
        vec.missing.append("no female dialogue")
    if scores:
        vec.sentiment_female = math.fsum(scores) / len(scores)
    elif female_lines:
        vec.missing.append("no female sentiment score")

    by_genre = tuple(genre_scores.female_by_genre) if genre_scores is not None else ()
    for slot in range(3):
        name = f"genre{slot + 1}_tag_female"
        if slot < len(by_genre):
            setattr(vec, name, by_genre[slot])
        elif female_lines:
            vec.missing.append(f"{name} unavailable")
    if genre_scores is not None and female_lines:
        vec.missing.extend(m for m in genre_scores.missing if "female" in m or "genre" in m)

    if bundle.financials is not None:
        vec.extra["budget"] = bundle.financials.budget
        vec.extra["revenue"] = bundle.financials.revenue
        vec.extra["roi"] = bundle.financials.roi
    return vec


# --------------------------------------------------------------------------
# Bechdel


@dataclass
class BechdelResult:
    movie_id: str
    has_two_named_females: bool
    has_female_conversation: bool
    has_non_male_topic: bool
    witness: list | None = None

    @property
    def passes(self) -> bool:
        return self.has_two_named_females and self.has_female_conversation and self.has_non_male_topic

    @property
    def flags(self) -> tuple:
        return (self.has_two_named_females, self.has_female_conversation, self.has_non_male_topic)


def is_named(name: str, blocklist=NAMED_BLOCKLIST) -> bool:
    """A name counts unless empty or headed by a generic role word ("OLD WOMAN")."""
    words = normalize_name(name).split()
    return bool(words) and words[-1] not in blocklist


def bechdel_score(bundle, male_reference=MALE_REFERENCE, blocklist=NAMED_BLOCKLIST) -> BechdelResult:
    chars = bundle.character_index()
    females = {cid for cid, c in chars.items() if c.gender == "female"}
    named = [cid for cid in females if is_named(chars[cid].name, blocklist)]

    lexicon = set(male_reference)
    for c in chars.values():
        if c.gender == "male":
            words = normalize_name(c.name).split()
            if words:
                lexicon.add(words[0])

    lines = bundle.line_index()
    female_convs = [
        conv
        for conv in bundle.conversations
        if conv.first_character_id in females and conv.second_character_id in females
    ]
    witness = None
    for conv in female_convs:
        if not any(lexicon.intersection(tokenize(lines[u].text).lower) for u in conv.utterances):
            witness = conv
            break
    result = BechdelResult(
        movie_id=bundle.movie_id,
        has_two_named_females=len(named) >= 2,
        has_female_conversation=bool(female_convs),
        has_non_male_topic=witness is not None,
    )
    if result.passes:
        result.witness = list(witness.utterances)
    return result


def write_bechdel(results, path) -> Path:
    return write_csv(
        path,
        ["movie_id", "two_named_females", "female_conversation", "non_male_topic", "passes", "witness_lines"],
        [
            [r.movie_id, *r.flags, r.passes, " ".join(r.witness) if r.witness else ""]
            for r in results
        ],
    )


# --------------------------------------------------------------------------
# matrix


@dataclass
class FeatureMatrix:
    row_keys: list
    columns: list
    values: np.ndarray
    excluded: list = field(default_factory=list)  # (movie_id, reason)


def assemble_matrix(vectors, extra_columns=()) -> FeatureMatrix:
    columns = list(COLUMNS) + list(extra_columns)
    keys, rows, excluded = [], [], []
    for vec in vectors:
        values = vec.values(extra_columns)
        absent = [c for c, v in zip(columns, values) if v is None or (isinstance(v, float) and math.isnan(v))]
        if absent:
            reasons = vec.missing or [f"{c} missing" for c in absent]
            excluded.append((vec.movie_id, "; ".join(dict.fromkeys(reasons))))
            continue
        keys.append(vec.movie_id)
        rows.append([float(v) for v in values])
    if len(rows) < 2:
        raise AssemblyError(f"need at least 2 complete rows, got {len(rows)}")
    return FeatureMatrix(keys, columns, np.array(rows, dtype=float), excluded)


def write_matrix(matrix: FeatureMatrix, path) -> Path:
    return write_csv(
        path,
        ["movie_id"] + matrix.columns,
        [[key] + list(row) for key, row in zip(matrix.row_keys, matrix.values)],
    )


def read_matrix(path) -> FeatureMatrix:
    import csv

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        keys, rows = [], []
        for row in reader:
            if not row:
                continue
            keys.append(row[0])
            rows.append([float(v) for v in row[1:]])
    values = np.array(rows, dtype=float).reshape(len(rows), len(header) - 1)
    return FeatureMatrix(keys, header[1:], values)


# --------------------------------------------------------------------------
# ratio reports


@dataclass
class YearRatios:
    year: int | None
    counts: dict  # metric -> [male, female]

    def ratio(self, metric: str) -> float | None:
        male, female = self.counts[metric]
        return male / female if female else None


RATIO_METRICS = ("cast", "crew", "dialogue", "pos_tags")


def ratio_reports(bundles, pos_by_line: dict | None = None) -> list[YearRatios]:
    """Male / female ratios per release year; None where the female count is zero."""
    table: dict = defaultdict(lambda: {m: [0, 0] for m in RATIO_METRICS})
    for b in bundles:
        row = table[b.movie.release_year]
        gender_of = {}
        for c in b.characters:
            gender_of[c.character_id] = c.gender
            if c.gender in ("male", "female"):
                row["cast"][c.gender == "female"] += 1
        for c in b.crew:
            if c.gender in ("male", "female"):
                row["crew"][c.gender == "female"] += 1
        for ln in b.lines:
            g = gender_of.get(ln.character_id)
            if g not in ("male", "female"):
                continue
            row["dialogue"][g == "female"] += 1
            if pos_by_line is not None and ln.line_id in pos_by_line:
                row["pos_tags"][g == "female"] += pos_by_line[ln.line_id].total
    years = sorted(table, key=lambda y: (y is None, y))
    return [YearRatios(y, table[y]) for y in years]


def write_ratios(ratios, path) -> Path:
    header = ["year"]
    for m in RATIO_METRICS:
        header += [f"{m}_male", f"{m}_female", f"{m}_ratio", f"{m}_undefined"]
    rows = []
    for yr in ratios:
        row = ["" if yr.year is None else str(yr.year)]
        for m in RATIO_METRICS:
            male, female = yr.counts[m]
            r = yr.ratio(m)
            row += [male, female, r, r is None]
        rows.append(row)
    return write_csv(path, header, rows)
