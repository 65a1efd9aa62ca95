"""Tokenizing, stop-word filtering, coarse POS counts and lexicon sentiment."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Protocol, Sequence

NOUN, VERB, ADJ, OTHER = "NOUN", "VERB", "ADJ", "OTHER"
COARSE_TAGS = (NOUN, VERB, ADJ, OTHER)

CAPS_BOOST = 0.733
EXCLAMATION_BOOST = 0.292
MAX_EXCLAMATIONS = 3
DEFAULT_ALPHA = 15.0

_TOKEN_RE = re.compile(r"(?:[^\W_]|')+")
_APOSTROPHES = str.maketrans({"’": "'", "‘": "'", "`": "'"})


@dataclass(frozen=True)
class TokenList:
    lower: tuple
    original: tuple

    def __post_init__(self):
        if len(self.lower) != len(self.original):
            raise ValueError("token lists differ in length")

    def __len__(self):
        return len(self.lower)

    def __iter__(self):
        return iter(self.lower)


def tokenize(text: str) -> TokenList:
    """
    Split on every run of characters that are not letters, digits or apostrophes.

    Apostrophes stay inside tokens ("you're"); leading and trailing ones are
    trimmed so quoting does not create distinct tokens.
    """
    original = []
    for match in _TOKEN_RE.finditer(text.translate(_APOSTROPHES)):
        tok = match.group(0).strip("'")
        if tok:
            original.append(tok)
    return TokenList(lower=tuple(t.lower() for t in original), original=tuple(original))


def remove_stopwords(tokens: TokenList, stoplist) -> TokenList:
    keep = [i for i, t in enumerate(tokens.lower) if t not in stoplist]
    return TokenList(
        lower=tuple(tokens.lower[i] for i in keep),
        original=tuple(tokens.original[i] for i in keep),
    )


def _data_path(name: str):
    return resources.files("screenrep") / "data" / name


def load_wordlist(path=None, default: str = "stopwords_en.txt") -> frozenset:
    """One word per line; blank lines and ``#`` comments ignored."""
    source = Path(path) if path is not None else _data_path(default)
    words = set()
    for line in source.read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip().lower()
        if line:
            words.add(line)
    return frozenset(words)


def load_stopwords(path=None) -> frozenset:
    return load_wordlist(path, "stopwords_en.txt")


# --------------------------------------------------------------------------
# part of speech


class PosTagger(Protocol):
    def tag(self, words: Sequence[str]) -> list[str]:
        """Return one fine-grained (Penn style) tag per word."""
        ...


def coarse(tag: str) -> str:
    if tag.startswith("NN"):
        return NOUN
    if tag.startswith("VB"):
        return VERB
    if tag.startswith("JJ"):
        return ADJ
    return OTHER


def pos_tag(tokens: TokenList, tagger: PosTagger) -> list[tuple[str, str]]:
    if not len(tokens):
        return []
    tags = tagger.tag(list(tokens.original))
    if len(tags) != len(tokens):
        raise RuntimeError(f"tagger returned {len(tags)} tags for {len(tokens)} tokens")
    return [(tok, coarse(tag)) for tok, tag in zip(tokens.lower, tags)]


@dataclass(frozen=True)
class PosCounts:
    nouns: int = 0
    verbs: int = 0
    adjectives: int = 0
    other: int = 0

    @property
    def total(self) -> int:
        return self.nouns + self.verbs + self.adjectives + self.other

    def __add__(self, rhs: "PosCounts") -> "PosCounts":
        return PosCounts(
            self.nouns + rhs.nouns,
            self.verbs + rhs.verbs,
            self.adjectives + rhs.adjectives,
            self.other + rhs.other,
        )


def count_pos(tagged: Iterable[tuple[str, str]]) -> PosCounts:
    counts = dict.fromkeys(COARSE_TAGS, 0)
    for _, tag in tagged:
        counts[tag if tag in counts else OTHER] += 1
    return PosCounts(counts[NOUN], counts[VERB], counts[ADJ], counts[OTHER])


# --------------------------------------------------------------------------
# sentiment


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class SentimentScore:
    raw_sum: float
    final: float


def load_lexicon(path=None) -> dict[str, float]:
    """Read a ``word<TAB>valence`` file; valences must lie in [-4, 4]."""
    source = Path(path) if path is not None else _data_path("sentiment_lexicon.tsv")
    lexicon = {}
    for lineno, line in enumerate(source.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise LexiconError(f"{source}:{lineno}: expected word<TAB>valence")
        word, valence = parts[0].strip().lower(), float(parts[1])
        if not -4.0 <= valence <= 4.0:
            raise LexiconError(f"{source}:{lineno}: valence {valence} outside [-4, 4]")
        lexicon.setdefault(word, valence)
    return lexicon


def normalize_score(x: float, alpha: float = DEFAULT_ALPHA) -> float:
    """Squash an unbounded valence sum into (-1, 1): x / sqrt(x^2 + alpha)."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if math.isinf(x):
        return math.copysign(1.0, x)
    return x / math.sqrt(x * x + alpha)


def _trailing_exclamations(text: str) -> int:
    stripped = text.rstrip()
    return len(stripped) - len(stripped.rstrip("!"))


def sentiment(
    text: str,
    lexicon: dict,
    alpha: float = DEFAULT_ALPHA,
    caps_boost: float = CAPS_BOOST,
    exclamation_boost: float = EXCLAMATION_BOOST,
    tokens: TokenList | None = None,
) -> SentimentScore:
    """
    Lexicon valence sum over the raw (unstopped) tokens, then normalized.

    A lexicon word written in capitals (two letters or more) has its magnitude
    raised by ``caps_boost``; each trailing "!" (at most three) pushes the
    sum further from zero by ``exclamation_boost``.
    """
    if tokens is None:
        tokens = tokenize(text)
    x = 0.0
    for low, orig in zip(tokens.lower, tokens.original):
        valence = lexicon.get(low)
        if valence is None:
            continue
        if len(orig) >= 2 and orig.isupper() and valence != 0:
            valence += math.copysign(caps_boost, valence)
        x += valence
    if x != 0.0:
        bangs = min(_trailing_exclamations(text), MAX_EXCLAMATIONS)
        x += math.copysign(bangs * exclamation_boost, x)
    return SentimentScore(raw_sum=x, final=normalize_score(x, alpha))
