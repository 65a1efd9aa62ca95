"""Per-movie analysis: tokens, POS counts, sentiment, embeddings, features."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .embedding import GenreTagScores, WordVectorStore, embed_tokens, genre_tag_scores
from .features import (
    MALE_REFERENCE,
    NAMED_BLOCKLIST,
    BechdelResult,
    MovieFeatureVector,
    bechdel_score,
    build_feature_vector,
)
from .text import (
    CAPS_BOOST,
    DEFAULT_ALPHA,
    EXCLAMATION_BOOST,
    PosTagger,
    count_pos,
    pos_tag,
    remove_stopwords,
    sentiment,
    tokenize,
)


@dataclass
class Resources:
    stoplist: frozenset
    lexicon: dict
    tagger: PosTagger
    store: WordVectorStore | None
    alpha: float = DEFAULT_ALPHA
    caps_boost: float = CAPS_BOOST
    exclamation_boost: float = EXCLAMATION_BOOST
    genre_limit: int | None = 3
    male_reference: frozenset = MALE_REFERENCE
    named_blocklist: frozenset = NAMED_BLOCKLIST


@dataclass
class MovieAnalysis:
    movie_id: str
    pos_by_line: dict = field(default_factory=dict)
    sentiment_by_line: dict = field(default_factory=dict)
    embeddings: dict = field(default_factory=dict)
    genre_scores: GenreTagScores | None = None
    features: MovieFeatureVector | None = None
    bechdel: BechdelResult | None = None


def analyze_lines(bundle, res: Resources, with_embeddings: bool = True) -> MovieAnalysis:
    out = MovieAnalysis(bundle.movie_id)
    for line in bundle.lines:
        tokens = tokenize(line.text)
        # sentiment and POS see every token; only the genre embedding is stop-word filtered
        out.pos_by_line[line.line_id] = count_pos(pos_tag(tokens, res.tagger))
        out.sentiment_by_line[line.line_id] = sentiment(
            line.text,
            res.lexicon,
            alpha=res.alpha,
            caps_boost=res.caps_boost,
            exclamation_boost=res.exclamation_boost,
            tokens=tokens,
        )
        if with_embeddings and res.store is not None:
            out.embeddings[line.line_id] = embed_tokens(remove_stopwords(tokens, res.stoplist), res.store)
    return out


def analyze_bundle(bundle, res: Resources) -> MovieAnalysis:
    out = analyze_lines(bundle, res)
    if res.store is not None:
        out.genre_scores = genre_tag_scores(bundle, out.embeddings, res.store, res.genre_limit)
    out.features = build_feature_vector(bundle, out.genre_scores, out.pos_by_line, out.sentiment_by_line)
    out.bechdel = bechdel_score(bundle, res.male_reference, res.named_blocklist)
    return out


_WORKER_RESOURCES: Resources | None = None


def _init_worker(res: Resources) -> None:
    global _WORKER_RESOURCES
    _WORKER_RESOURCES = res


def _run_one(bundle) -> MovieAnalysis:
    return analyze_bundle(bundle, _WORKER_RESOURCES)


def analyze_all(bundles, res: Resources, workers: int = 1) -> list[MovieAnalysis]:
    """Analyze every bundle; results come back in input order whatever the pool size."""
    if workers <= 1 or len(bundles) < 2:
        return [analyze_bundle(b, res) for b in bundles]
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(res,)) as pool:
        return list(pool.map(_run_one, bundles, chunksize=max(1, len(bundles) // (4 * workers))))
