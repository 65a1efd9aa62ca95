"""Word-vector loading, dialogue and genre embeddings, genre alignment scores."""

from __future__ import annotations

import io
import math
import struct
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Sequence

import numpy as np

from .text import TokenList, tokenize


class VectorLoadError(ValueError):
    pass


class UndefinedSimilarityError(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class WordVectorStore:
    index: dict
    matrix: np.ndarray
    case_fold: bool = True
    diagnostics: tuple = ()

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self):
        return len(self.index)

    def __contains__(self, word):
        return self._key(word) in self.index

    def _key(self, word: str) -> str:
        return word.lower() if self.case_fold else word

    def get(self, word: str):
        i = self.index.get(self._key(word))
        return None if i is None else self.matrix[i]

    @classmethod
    def from_dict(cls, vectors: dict, case_fold: bool = True) -> "WordVectorStore":
        words = list(vectors)
        matrix = np.array([np.asarray(vectors[w], dtype=float) for w in words], dtype=float)
        if matrix.ndim != 2 or matrix.shape[1] == 0:
            raise VectorLoadError("vectors must share one positive dimension")
        index = {}
        for i, w in enumerate(words):
            index.setdefault(w.lower() if case_fold else w, i)
        return cls(index=index, matrix=matrix, case_fold=case_fold)


def _header(line: str):
    parts = line.split()
    if len(parts) != 2:
        raise VectorLoadError(f"bad header {line.strip()!r}; expected 'vocab_count dimension'")
    try:
        count, dim = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise VectorLoadError(f"bad header {line.strip()!r}") from exc
    if count < 0 or dim <= 0:
        raise VectorLoadError(f"bad header {line.strip()!r}")
    return count, dim


def _read_text(reader: BinaryIO):
    text = io.TextIOWrapper(reader, encoding="utf-8", errors="replace")
    count, dim = _header(text.readline())
    entries, diags = [], []
    seen_rows = 0
    for lineno, line in enumerate(text, 2):
        parts = line.rstrip("\r\n").rstrip(" ").split(" ")
        if not parts or parts == [""]:
            continue
        seen_rows += 1
        if len(parts) != dim + 1:
            raise VectorLoadError(f"line {lineno}: {len(parts) - 1} values, header declares {dim}")
        try:
            vec = [float(v) for v in parts[1:]]
        except ValueError:
            diags.append(f"line {lineno}: non-numeric value for {parts[0]!r}; row skipped")
            continue
        entries.append((parts[0], vec))
    text.detach()
    return count, dim, seen_rows, entries, diags


def _read_binary(reader: BinaryIO):
    head = reader.readline().decode("utf-8", errors="replace")
    count, dim = _header(head)
    width = 4 * dim
    entries, diags = [], []
    seen_rows = 0
    for _ in range(count):
        word = bytearray()
        while True:
            ch = reader.read(1)
            if not ch:
                break
            if ch == b" ":
                break
            if ch != b"\n" or word:
                word.extend(ch)
        if not word:
            break
        raw = reader.read(width)
        if len(raw) != width:
            raise VectorLoadError(f"truncated vector for {bytes(word)!r}")
        seen_rows += 1
        entries.append((word.decode("utf-8", errors="replace"), list(struct.unpack(f"<{dim}f", raw))))
    return count, dim, seen_rows, entries, diags


def load_vectors(reader: BinaryIO, fmt: str = "text", case_fold: bool = True) -> WordVectorStore:
    """
    Read a word2vec-style vector file.

    The header is ``vocab_count dimension``. Text files then hold one
    ``word v1 ... vd`` row per word; binary files hold the word, a space and
    ``d`` little-endian float32 values. The first occurrence of a duplicated
    word wins.
    """
    if fmt == "text":
        count, dim, seen, entries, diags = _read_text(reader)
    elif fmt == "binary":
        count, dim, seen, entries, diags = _read_binary(reader)
    else:
        raise ValueError(f"unknown vector format {fmt!r}")
    if seen != count:
        raise VectorLoadError(f"header declares {count} words, file holds {seen}")
    index, rows = {}, []
    for word, vec in entries:
        key = word.lower() if case_fold else word
        if key in index:
            diags.append(f"duplicate word {word!r}; keeping first occurrence")
            continue
        index[key] = len(rows)
        rows.append(vec)
    matrix = np.array(rows, dtype=float).reshape(len(rows), dim)
    return WordVectorStore(index=index, matrix=matrix, case_fold=case_fold, diagnostics=tuple(diags))


def save_vectors_text(store: WordVectorStore, fh) -> None:
    words = sorted(store.index, key=store.index.get)
    fh.write(f"{len(words)} {store.dim}\n")
    for w in words:
        fh.write(w + " " + " ".join(repr(float(v)) for v in store.matrix[store.index[w]]) + "\n")


# --------------------------------------------------------------------------
# embeddings


@dataclass(frozen=True)
class DialogueEmbedding:
    vector: np.ndarray
    n: int


def embed_tokens(tokens: TokenList | Sequence[str], store: WordVectorStore) -> DialogueEmbedding | None:
    """Mean vector of the in-vocabulary tokens, or None when there are none."""
    words = tokens.lower if isinstance(tokens, TokenList) else tokens
    vecs = [v for v in (store.get(w) for w in words) if v is not None]
    if not vecs:
        return None
    return DialogueEmbedding(vector=np.mean(vecs, axis=0), n=len(vecs))


def embed_genre(label: str, store: WordVectorStore):
    """Multi-word labels ("science fiction") average their word vectors."""
    emb = embed_tokens(tokenize(label), store)
    return None if emb is None else emb.vector


def cosine_similarity(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch {u.shape} vs {v.shape}")
    nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise UndefinedSimilarityError("cosine similarity undefined for a zero vector")
    return max(-1.0, min(1.0, float(np.dot(u, v)) / (nu * nv)))


@dataclass
class GenreTagScores:
    genres: tuple = ()
    male: float | None = None
    female: float | None = None
    male_by_genre: tuple = ()
    female_by_genre: tuple = ()
    n_male: int = 0
    n_female: int = 0
    missing: list = field(default_factory=list)


def select_genres(genres: Iterable[str], store: WordVectorStore, limit: int | None = 3):
    """First ``limit`` genres (file order) that have a usable embedding."""
    chosen = []
    for label in genres:
        vec = embed_genre(label, store)
        if vec is None or not np.any(vec):
            continue
        chosen.append((label, vec))
        if limit is not None and len(chosen) == limit:
            break
    return chosen


def genre_tag_scores(bundle, embeddings: dict, store: WordVectorStore, limit: int | None = 3) -> GenreTagScores:
    """
    Average summed genre cosine per gender.

    For each side, every dialogue with a defined embedding contributes the
    sum of its cosines against the selected genres; the total is divided by
    the number of such dialogues. ``embeddings`` maps line_id to a
    DialogueEmbedding or None. Speakers of unknown gender are ignored.
    """
    genres = select_genres(bundle.movie.genres, store, limit)
    result = GenreTagScores(genres=tuple(g for g, _ in genres))
    if not genres:
        result.missing.append("no genre with an embedding")
        return result
    speakers = {c.character_id: c.gender for c in bundle.characters}
    sums = {"male": [0.0] * len(genres), "female": [0.0] * len(genres)}
    counts = {"male": 0, "female": 0}
    for line in bundle.lines:
        side = speakers.get(line.character_id)
        emb = embeddings.get(line.line_id)
        if side not in sums or emb is None or not np.any(emb.vector):
            continue
        counts[side] += 1
        for t, (_, gvec) in enumerate(genres):
            sums[side][t] += cosine_similarity(gvec, emb.vector)
    for side in ("male", "female"):
        n = counts[side]
        if n == 0:
            result.missing.append(f"no {side} dialogue with an embedding")
            continue
        per_genre = tuple(s / n for s in sums[side])
        setattr(result, side, math.fsum(sums[side]) / n)
        setattr(result, f"{side}_by_genre", per_genre)
    result.n_male, result.n_female = counts["male"], counts["female"]
    return result
