"""
Reading the screenplay dialogue corpus and joining it into per-movie bundles.

The four corpus files use a field separator token (`` +++$+++ `` by default);
crew and financial data come from a separate CSV matched on normalized title
and release year.
"""

from __future__ import annotations

import ast
import csv
import io
import json
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, Sequence

from ._io import write_csv

DELIMITER = " +++$+++ "
ENCODING = "iso-8859-1"
CACHE_FORMAT = "screenrep-bundles/1"

MOVIE_SCHEMA = ("movie_id", "title", "year", "rating", "votes", "genres")
CHARACTER_SCHEMA = ("character_id", "name", "movie_id", "title", "gender", "credit_position")
LINE_SCHEMA = ("line_id", "character_id", "movie_id", "character_name", "text")
CONVERSATION_SCHEMA = ("first_character_id", "second_character_id", "movie_id", "utterances")
CREW_COLUMNS = ("movie_title", "year", "crew_name", "job_title", "gender", "budget", "revenue")

_GENDER_CODES = {
    "m": "male",
    "male": "male",
    "2": "male",
    "f": "female",
    "female": "female",
    "1": "female",
}


class CorpusError(ValueError):
    pass


class UndefinedRoiError(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class Diagnostic:
    source: str
    line: int
    message: str

    def __str__(self):
        return f"{self.source}:{self.line}: {self.message}"


@dataclass
class MovieRecord:
    movie_id: str
    title: str
    release_year: int | None
    imdb_rating: float | None
    vote_count: int | None
    genres: list


@dataclass
class CharacterRecord:
    character_id: str
    name: str
    movie_id: str
    gender: str = "unknown"
    # "corpus" when the file supplied M/F, "inferred" after model fill, else None
    gender_source: str | None = None


@dataclass
class DialogueLine:
    line_id: str
    character_id: str
    movie_id: str
    text: str


@dataclass
class ConversationRecord:
    movie_id: str
    first_character_id: str
    second_character_id: str
    utterances: list


@dataclass
class CrewRecord:
    movie_id: str
    name: str
    job_title: str
    gender: str = "unknown"


@dataclass
class Financials:
    budget: float
    revenue: float
    roi: float | None = None


@dataclass
class MovieBundle:
    movie: MovieRecord
    characters: list = field(default_factory=list)
    lines: list = field(default_factory=list)
    conversations: list = field(default_factory=list)
    crew: list = field(default_factory=list)
    financials: Financials | None = None

    @property
    def movie_id(self) -> str:
        return self.movie.movie_id

    def character_index(self) -> dict:
        return {c.character_id: c for c in self.characters}

    def line_index(self) -> dict:
        return {ln.line_id: ln for ln in self.lines}


@dataclass
class JoinReport:
    excluded: list = field(default_factory=list)  # (movie_id, reason)
    unmatched_crew: list = field(default_factory=list)  # movie_ids with no crew/financial row
    diagnostics: list = field(default_factory=list)


# --------------------------------------------------------------------------
# low-level parsing


def parse_delimited_file(
    reader: BinaryIO,
    schema: Sequence[str],
    delimiter: str = DELIMITER,
    encoding: str = ENCODING,
    diagnostics: list | None = None,
    source: str = "<stream>",
) -> list[tuple]:
    """
    Split each non-empty line into exactly ``len(schema)`` fields.

    The last field absorbs any further delimiter occurrences (dialogue text
    may legitimately contain the token). Lines with too few fields are
    skipped and reported in ``diagnostics``.
    """
    text = io.TextIOWrapper(reader, encoding=encoding, errors="replace", newline=None)
    rows = []
    width = len(schema)
    for lineno, raw in enumerate(text, 1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        fields = line.split(delimiter, width - 1)
        if len(fields) != width:
            if diagnostics is not None:
                diagnostics.append(
                    Diagnostic(source, lineno, f"expected {width} fields, found {len(fields)}")
                )
            continue
        rows.append(tuple(f.strip() for f in fields))
    text.detach()
    return rows


def format_delimited(rows: Iterable[Sequence[str]], delimiter: str = DELIMITER) -> str:
    return "".join(delimiter.join(row) + "\n" for row in rows)


def parse_utterance_list(text: str) -> list[str]:
    """Parse a bracketed list literal such as ``['L194', 'L195']``."""
    try:
        value = ast.literal_eval(text.strip())
    except (ValueError, SyntaxError) as exc:
        raise CorpusError(f"malformed utterance list {text!r}") from exc
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise CorpusError(f"utterance list must be a list of strings: {text!r}")
    return [v.strip() for v in value]


def compute_roi(budget: float, revenue: float) -> float:
    """Return on investment in percent."""
    if budget <= 0:
        raise UndefinedRoiError(f"ROI undefined for budget {budget}")
    return (revenue - budget) / budget * 100.0


def normalize_title(title: str) -> str:
    return " ".join(title.lower().split())


def _parse_year(text: str) -> int | None:
    m = re.match(r"\s*(\d{4})", text)
    return int(m.group(1)) if m else None


def _parse_float(text: str) -> float | None:
    try:
        return float(text)
    except (TypeError, ValueError):
        return None


def _parse_int(text: str) -> int | None:
    value = _parse_float(text)
    return int(value) if value is not None else None


def _gender(text: str) -> str:
    return _GENDER_CODES.get(text.strip().lower(), "unknown")


# --------------------------------------------------------------------------
# record builders


def read_movies(rows, diagnostics=None, source="movies") -> list[MovieRecord]:
    movies, seen = [], set()
    for i, (movie_id, title, year, rating, votes, genres) in enumerate(rows, 1):
        if not movie_id or movie_id in seen:
            if diagnostics is not None:
                diagnostics.append(Diagnostic(source, i, f"empty or duplicate movie id {movie_id!r}"))
            continue
        try:
            labels = [g.strip().lower() for g in parse_utterance_list(genres) if g.strip()]
        except CorpusError as exc:
            labels = []
            if diagnostics is not None:
                diagnostics.append(Diagnostic(source, i, str(exc)))
        seen.add(movie_id)
        movies.append(
            MovieRecord(movie_id, title, _parse_year(year), _parse_float(rating), _parse_int(votes), labels)
        )
    return movies


def read_characters(rows) -> list[CharacterRecord]:
    out = []
    for character_id, name, movie_id, _title, gender, _position in rows:
        g = _gender(gender)
        out.append(CharacterRecord(character_id, name, movie_id, g, "corpus" if g != "unknown" else None))
    return out


def read_lines(rows) -> list[DialogueLine]:
    return [DialogueLine(line_id, char_id, movie_id, text) for line_id, char_id, movie_id, _name, text in rows]


def read_conversations(rows, diagnostics=None, source="conversations") -> list[ConversationRecord]:
    out = []
    for i, (first, second, movie_id, utterances) in enumerate(rows, 1):
        try:
            ids = parse_utterance_list(utterances)
        except CorpusError as exc:
            if diagnostics is not None:
                diagnostics.append(Diagnostic(source, i, str(exc)))
            continue
        if not ids:
            if diagnostics is not None:
                diagnostics.append(Diagnostic(source, i, "empty conversation"))
            continue
        out.append(ConversationRecord(movie_id, first, second, ids))
    return out


@dataclass
class CrewTable:
    """Crew rows and financials keyed by (normalized title, year)."""

    crew: dict = field(default_factory=dict)
    financials: dict = field(default_factory=dict)


def read_crew_csv(reader, diagnostics=None, source="crew") -> CrewTable:
    table = CrewTable()
    text = reader if isinstance(reader, io.TextIOBase) else io.TextIOWrapper(reader, encoding="utf-8", errors="replace")
    rows = csv.DictReader(text)
    missing = [c for c in CREW_COLUMNS if c not in (rows.fieldnames or [])]
    if rows.fieldnames and missing:
        raise CorpusError(f"{source}: missing columns {missing}")
    for i, row in enumerate(rows, 2):
        key = (normalize_title(row["movie_title"] or ""), _parse_year(row["year"] or ""))
        if not key[0]:
            if diagnostics is not None:
                diagnostics.append(Diagnostic(source, i, "row without movie title"))
            continue
        table.crew.setdefault(key, [])
        name = (row["crew_name"] or "").strip()
        if name:
            table.crew[key].append((name, (row["job_title"] or "").strip(), _gender(row["gender"] or "")))
        budget, revenue = _parse_float(row["budget"]), _parse_float(row["revenue"])
        if key not in table.financials and budget is not None and revenue is not None:
            table.financials[key] = (budget, revenue)
    if not isinstance(reader, io.TextIOBase):
        text.detach()
    return table


# --------------------------------------------------------------------------
# join


def join_corpus(movies, characters, lines, conversations, crew: CrewTable | None = None):
    """
    Group records per movie and attach crew and financials.

    Returns
    -------
    bundles : list of MovieBundle
        One per retained movie, in metadata order.
    report : JoinReport
    """
    crew = crew or CrewTable()
    report = JoinReport()
    chars_by_movie: dict[str, list] = {}
    for c in characters:
        chars_by_movie.setdefault(c.movie_id, []).append(c)
    char_ids = {c.character_id for c in characters}
    lines_by_movie: dict[str, list] = {}
    for ln in lines:
        if ln.character_id not in char_ids:
            report.diagnostics.append(Diagnostic("lines", 0, f"line {ln.line_id} has unknown speaker {ln.character_id}"))
            continue
        lines_by_movie.setdefault(ln.movie_id, []).append(ln)
    convs_by_movie: dict[str, list] = {}
    for conv in conversations:
        convs_by_movie.setdefault(conv.movie_id, []).append(conv)

    bundles = []
    for movie in movies:
        mid = movie.movie_id
        m_lines = lines_by_movie.get(mid, [])
        m_chars = chars_by_movie.get(mid, [])
        if not m_chars:
            report.excluded.append((mid, "no characters"))
            continue
        if not m_lines:
            report.excluded.append((mid, "no dialogue lines"))
            continue
        line_ids = {ln.line_id for ln in m_lines}
        kept = []
        for conv in convs_by_movie.get(mid, []):
            missing = [u for u in conv.utterances if u not in line_ids]
            if missing:
                report.diagnostics.append(
                    Diagnostic("conversations", 0, f"{mid}: dropped conversation with unresolved lines {missing}")
                )
                continue
            kept.append(conv)

        key = (normalize_title(movie.title), movie.release_year)
        m_crew = [CrewRecord(mid, name, job, g) for name, job, g in crew.crew.get(key, [])]
        financials = None
        if key in crew.financials:
            budget, revenue = crew.financials[key]
            try:
                roi = compute_roi(budget, revenue)
            except UndefinedRoiError:
                roi = None
            financials = Financials(budget, revenue, roi)
        if key not in crew.crew and key not in crew.financials:
            report.unmatched_crew.append(mid)
        bundles.append(MovieBundle(movie, m_chars, m_lines, kept, m_crew, financials))
    return bundles, report


@dataclass
class CorpusPaths:
    movies: Path
    characters: Path
    lines: Path
    conversations: Path
    crew: Path | None = None


def load_corpus(paths: CorpusPaths, delimiter: str = DELIMITER, encoding: str = ENCODING):
    """Parse all corpus files from disk and join them."""
    diags: list = []

    def parse(path, schema):
        with open(path, "rb") as fh:
            return parse_delimited_file(fh, schema, delimiter, encoding, diags, source=Path(path).name)

    movies = read_movies(parse(paths.movies, MOVIE_SCHEMA), diags, Path(paths.movies).name)
    characters = read_characters(parse(paths.characters, CHARACTER_SCHEMA))
    lines = read_lines(parse(paths.lines, LINE_SCHEMA))
    conversations = read_conversations(parse(paths.conversations, CONVERSATION_SCHEMA), diags, Path(paths.conversations).name)
    crew = None
    if paths.crew is not None:
        with open(paths.crew, "rb") as fh:
            crew = read_crew_csv(fh, diags, Path(paths.crew).name)
    bundles, report = join_corpus(movies, characters, lines, conversations, crew)
    report.diagnostics = diags + report.diagnostics
    return bundles, report


def write_exclusions(report: JoinReport, path) -> Path:
    return write_csv(path, ["movie_id", "reason"], report.excluded)


# --------------------------------------------------------------------------
# cache


def bundles_to_json(bundles) -> str:
    doc = {"format": CACHE_FORMAT, "bundles": [asdict(b) for b in bundles]}
    return json.dumps(doc, sort_keys=True, indent=1, ensure_ascii=True) + "\n"


def bundles_from_json(text: str) -> list[MovieBundle]:
    doc = json.loads(text)
    if doc.get("format") != CACHE_FORMAT:
        raise CorpusError(f"cache format {doc.get('format')!r} does not match {CACHE_FORMAT!r}; re-run ingest")
    out = []
    for b in doc["bundles"]:
        fin = b.get("financials")
        out.append(
            MovieBundle(
                movie=MovieRecord(**b["movie"]),
                characters=[CharacterRecord(**c) for c in b["characters"]],
                lines=[DialogueLine(**ln) for ln in b["lines"]],
                conversations=[ConversationRecord(**c) for c in b["conversations"]],
                crew=[CrewRecord(**c) for c in b["crew"]],
                financials=Financials(**fin) if fin else None,
            )
        )
    return out
