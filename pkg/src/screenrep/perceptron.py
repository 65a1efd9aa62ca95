"""
Greedy averaged-perceptron part-of-speech tagger.

Left-to-right tagging with the two previous predicted tags as context.
Weights are stored as gzip-compressed tab-separated text::

    #classes    NN  VB  ...
    #tagdict    the DT
    feature     tag weight
"""

from __future__ import annotations

import gzip
import io
import random
from collections import Counter, defaultdict
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

START = ("-START-", "-START2-")
END = ("-END-", "-END2-")


def _normalize(word: str) -> str:
    if "-" in word and word[0] != "-":
        return "!HYPHEN"
    if word.isdigit() and len(word) == 4:
        return "!YEAR"
    if word[:1].isdigit():
        return "!DIGITS"
    return word.lower()


def _features(i: int, word: str, context: Sequence[str], prev: str, prev2: str) -> list[str]:
    i += len(START)
    return [
        "bias",
        "i suffix " + word[-3:],
        "i pref1 " + word[:1],
        "i-1 tag " + prev,
        "i-2 tag " + prev2,
        "i tag+i-2 tag " + prev + " " + prev2,
        "i word " + context[i],
        "i-1 tag+i word " + prev + " " + context[i],
        "i-1 tag+i suffix " + prev + " " + word[-3:].lower(),
        "i-1 word " + context[i - 1],
        "i-1 suffix " + context[i - 1][-3:],
        "i-2 word " + context[i - 2],
        "i+1 word " + context[i + 1],
        "i+1 suffix " + context[i + 1][-3:],
        "i+2 word " + context[i + 2],
        "i shape " + ("C" if word[:1].isupper() else "c") + ("'" if "'" in word else ""),
    ]


class PerceptronTagger:
    """Implements the ``PosTagger`` protocol from :mod:`screenrep.text`."""

    def __init__(self, weights=None, classes=(), tagdict=None):
        self.weights: dict[str, dict[str, float]] = weights or {}
        self.classes = sorted(classes)
        self.tagdict: dict[str, str] = tagdict or {}

    # -- prediction -------------------------------------------------------

    def _predict(self, feats: Iterable[str]) -> str:
        scores = defaultdict(float)
        for f in feats:
            w = self.weights.get(f)
            if w:
                for tag, value in w.items():
                    scores[tag] += value
        # classes are sorted and max keeps the first maximum, so ties go alphabetically
        return max(self.classes, key=lambda c: scores[c])

    def tag(self, words: Sequence[str]) -> list[str]:
        context = list(START) + [_normalize(w) for w in words] + list(END)
        prev, prev2 = START
        out = []
        for i, word in enumerate(words):
            tag = self.tagdict.get(word) or self.tagdict.get(word.lower())
            if not tag:
                tag = self._predict(_features(i, word, context, prev, prev2))
            out.append(tag)
            prev2, prev = prev, tag
        return out

    # -- training ---------------------------------------------------------

    @classmethod
    def train(cls, sentences: Sequence[Sequence[tuple[str, str]]], iterations: int = 5, seed: int = 0):
        """Fit on ``[(word, tag), ...]`` sentences; deterministic for a fixed seed."""
        counts: dict[str, Counter] = defaultdict(Counter)
        classes = set()
        for sent in sentences:
            for word, tag in sent:
                counts[word][tag] += 1
                classes.add(tag)
        tagdict = {}
        for word, tags in counts.items():
            tag, n = tags.most_common(1)[0]
            if sum(tags.values()) >= 20 and n / sum(tags.values()) >= 0.97:
                tagdict[word] = tag

        self = cls(classes=classes, tagdict=tagdict)
        weights: dict[str, dict[str, float]] = defaultdict(dict)
        totals: dict[tuple[str, str], float] = defaultdict(float)
        stamps: dict[tuple[str, str], int] = defaultdict(int)
        step = 0
        self.weights = weights

        rng = random.Random(seed)
        order = list(sentences)
        for _ in range(iterations):
            for sent in order:
                words = [w for w, _ in sent]
                context = list(START) + [_normalize(w) for w in words] + list(END)
                prev, prev2 = START
                for i, (word, gold) in enumerate(sent):
                    guess = tagdict.get(word)
                    if not guess:
                        feats = _features(i, word, context, prev, prev2)
                        guess = self._predict(feats)
                        step += 1
                        if guess != gold:
                            for f in feats:
                                w = weights[f]
                                for tag, delta in ((gold, 1.0), (guess, -1.0)):
                                    key = (f, tag)
                                    old = w.get(tag, 0.0)
                                    totals[key] += (step - stamps[key]) * old
                                    stamps[key] = step
                                    w[tag] = old + delta
                    prev2, prev = prev, guess
            rng.shuffle(order)

        averaged = {}
        for f, w in weights.items():
            avg = {}
            for tag, value in w.items():
                key = (f, tag)
                total = totals[key] + (step - stamps[key]) * value
                mean = round(total / max(step, 1), 3)
                if mean:
                    avg[tag] = mean
            if avg:
                averaged[f] = avg
        self.weights = averaged
        return self

    # -- persistence ------------------------------------------------------

    def save(self, path) -> None:
        # mtime=0 and sorted output keep the file byte-reproducible
        with open(path, "wb") as raw, gzip.GzipFile(fileobj=raw, mode="wb", mtime=0) as gz, io.TextIOWrapper(
            gz, encoding="utf-8"
        ) as fh:
            fh.write("#classes\t" + "\t".join(self.classes) + "\n")
            for word in sorted(self.tagdict):
                fh.write(f"#tagdict\t{word}\t{self.tagdict[word]}\n")
            for f in sorted(self.weights):
                for tag in sorted(self.weights[f]):
                    fh.write(f"{f}\t{tag}\t{self.weights[f][tag]:g}\n")

    @classmethod
    def load(cls, path=None) -> "PerceptronTagger":
        if path is None:
            path = resources.files("screenrep") / "data" / "tagger_weights.tsv.gz"
        weights: dict[str, dict[str, float]] = defaultdict(dict)
        tagdict = {}
        classes: list[str] = []
        with gzip.open(Path(str(path)), "rt", encoding="utf-8") as fh:
            for line in fh:
                parts = line.rstrip("\n").split("\t")
                if parts[0] == "#classes":
                    classes = parts[1:]
                elif parts[0] == "#tagdict":
                    tagdict[parts[1]] = parts[2]
                else:
                    weights[parts[0]][parts[1]] = float(parts[2])
        return cls(weights=dict(weights), classes=classes, tagdict=tagdict)


def read_tagged_corpus(path, sep: str = "/") -> list[list[tuple[str, str]]]:
    """One sentence per line, tokens written ``word/TAG`` separated by spaces."""
    sentences = []
    with open(path, encoding="utf-8", errors="replace") as fh:
        for line in fh:
            sent = []
            for item in line.split():
                word, _, tag = item.rpartition(sep)
                if word and tag:
                    sent.append((word, tag))
            if sent:
                sentences.append(sent)
    return sentences
