"""
Character-name gender classifier.

Names are reduced to six categorical features (first and last one, two and
three characters) and fed to a binary decision tree whose internal nodes
test ``feature == value``. The tree is grown greedily on Gini impurity.
"""

from __future__ import annotations

import csv
import json
import random
import re
import unicodedata
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FEMALE, MALE, UNKNOWN = "female", "male", "unknown"
CLASSES = (FEMALE, MALE)
FEATURE_NAMES = ("first1", "first2", "first3", "last1", "last2", "last3")
MODEL_FORMAT = "screenrep-gender-tree/1"

_STRIP_RE = re.compile(r"[^a-z0-9 ]+")
_SPACE_RE = re.compile(r"\s+")


class InvalidNameError(ValueError):
    pass


class TrainingError(ValueError):
    pass


@dataclass(frozen=True)
class NameExample:
    name: str
    gender: str


def normalize_name(name: str) -> str:
    """Lowercase, fold accents, drop punctuation and collapse whitespace."""
    text = unicodedata.normalize("NFKD", name).lower()
    text = _SPACE_RE.sub(" ", text)
    text = _STRIP_RE.sub("", text)
    return _SPACE_RE.sub(" ", text).strip()


def extract_ngram_features(name: str) -> dict[str, str]:
    norm = normalize_name(name)
    if not norm:
        raise InvalidNameError(f"name {name!r} is empty after normalization")
    return {
        "first1": norm[:1],
        "first2": norm[:2],
        "first3": norm[:3],
        "last1": norm[-1:],
        "last2": norm[-2:],
        "last3": norm[-3:],
    }


def load_names_csv(path) -> list[NameExample]:
    """Read ``name,gender`` rows; genders other than M/F are dropped."""
    labels = {"m": MALE, "f": FEMALE, "male": MALE, "female": FEMALE}
    out = []
    with open(path, newline="", encoding="utf-8", errors="replace") as fh:
        reader = csv.reader(fh)
        for row in reader:
            if len(row) < 2:
                continue
            name, gender = row[0].strip(), labels.get(row[1].strip().lower())
            if gender and name and normalize_name(name):
                out.append(NameExample(name, gender))
    return out


# --------------------------------------------------------------------------
# tree


@dataclass
class Node:
    id: int
    parent: int | None
    depth: int
    counts: tuple  # (female, male)
    feature: str | None = None
    value: str | None = None
    match: int | None = None  # child taken when feature == value
    other: int | None = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    @property
    def label(self) -> str:
        # ties go to the alphabetically first class
        return FEMALE if self.counts[0] >= self.counts[1] else MALE

    @property
    def proportion(self) -> float:
        return max(self.counts) / sum(self.counts)


@dataclass
class GenderModel:
    nodes: list
    params: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)

    def leaf_for(self, features: dict) -> Node:
        node = self.nodes[0]
        while not node.is_leaf:
            node = self.nodes[node.match if features[node.feature] == node.value else node.other]
        return node

    @property
    def depth(self) -> int:
        return max(n.depth for n in self.nodes)

    def to_json(self) -> str:
        doc = {
            "format": MODEL_FORMAT,
            "classes": list(CLASSES),
            "features": list(FEATURE_NAMES),
            "params": self.params,
            "metrics": self.metrics,
            "nodes": [
                {
                    "id": n.id,
                    "parent": n.parent,
                    "depth": n.depth,
                    "counts": list(n.counts),
                    "test": None if n.is_leaf else {"feature": n.feature, "value": n.value},
                    "match": n.match,
                    "other": n.other,
                    "label": n.label,
                    "proportion": n.proportion,
                }
                for n in self.nodes
            ],
        }
        return json.dumps(doc, indent=1, sort_keys=True, ensure_ascii=True) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def from_json(cls, text: str) -> "GenderModel":
        doc = json.loads(text)
        if doc.get("format") != MODEL_FORMAT:
            raise ValueError(f"unsupported model format {doc.get('format')!r}")
        nodes = []
        for d in doc["nodes"]:
            test = d["test"] or {}
            nodes.append(
                Node(
                    id=d["id"],
                    parent=d["parent"],
                    depth=d["depth"],
                    counts=tuple(d["counts"]),
                    feature=test.get("feature"),
                    value=test.get("value"),
                    match=d["match"],
                    other=d["other"],
                )
            )
        return cls(nodes=nodes, params=doc["params"], metrics=doc["metrics"])

    @classmethod
    def load(cls, path) -> "GenderModel":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def _gini_sum(n, pos):
    """n * gini for a node with n samples of which pos are male (vectorised)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        neg = n - pos
        out = n - (pos * pos + neg * neg) / n
    return np.where(n > 0, out, 0.0)


class _Grower:
    def __init__(self, codes, y, vocab, max_depth, min_leaf):
        self.codes = codes
        self.y = y
        self.vocab = vocab
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.nodes: list[Node] = []

    def best_split(self, idx):
        n = len(idx)
        yi = self.y[idx]
        pos = yi.sum()
        parent = float(_gini_sum(np.array(float(n)), np.array(float(pos))))
        best = None
        for f, name in enumerate(FEATURE_NAMES):
            col = self.codes[idx, f]
            size = len(self.vocab[f])
            n_l = np.bincount(col, minlength=size).astype(float)
            p_l = np.bincount(col, weights=yi, minlength=size)
            ok = (n_l >= self.min_leaf) & (n - n_l >= self.min_leaf)
            if not ok.any():
                continue
            impurity = _gini_sum(n_l, p_l) + _gini_sum(n - n_l, pos - p_l)
            impurity = np.where(ok, impurity, np.inf)
            j = int(np.argmin(impurity))  # argmin keeps the smallest code, i.e. smallest value
            if best is None or impurity[j] < best[0] - 1e-9:
                best = (float(impurity[j]), f, j)
        if best is None or best[0] >= parent - 1e-9:
            return None
        return best[1], best[2]

    def grow(self):
        root = np.arange(len(self.y))
        stack = [(root, None, 0, None)]
        # depth-first with explicit stack; ids assigned in creation order
        while stack:
            idx, parent, depth, slot = stack.pop()
            pos = int(self.y[idx].sum())
            node = Node(id=len(self.nodes), parent=parent, depth=depth, counts=(len(idx) - pos, pos))
            self.nodes.append(node)
            if parent is not None:
                setattr(self.nodes[parent], slot, node.id)
            if depth >= self.max_depth or pos in (0, len(idx)):
                continue
            split = self.best_split(idx)
            if split is None:
                continue
            f, code = split
            node.feature = FEATURE_NAMES[f]
            node.value = self.vocab[f][code]
            mask = self.codes[idx, f] == code
            # push "other" first so the "match" branch is built (and numbered) first
            stack.append((idx[~mask], node.id, depth + 1, "other"))
            stack.append((idx[mask], node.id, depth + 1, "match"))
        return self.nodes


def _dedupe(examples):
    votes: dict[str, Counter] = defaultdict(Counter)
    first_seen = {}
    for ex in examples:
        key = normalize_name(ex.name)
        if not key:
            continue
        votes[key][ex.gender] += 1
        first_seen.setdefault(key, ex.name)
    out = []
    for key, counter in votes.items():
        ranked = counter.most_common()
        if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
            continue
        out.append(NameExample(first_seen[key], ranked[0][0]))
    return out


def split_examples(examples, train_fraction: float, seed: int):
    """Stratified seeded shuffle-split; returns (train, test)."""
    rng = random.Random(seed)
    train, test = [], []
    for gender in CLASSES:
        group = sorted((e for e in examples if e.gender == gender), key=lambda e: normalize_name(e.name))
        rng.shuffle(group)
        cut = int(round(train_fraction * len(group)))
        cut = min(max(cut, 1), len(group) - 1) if len(group) > 1 else len(group)
        train.extend(group[:cut])
        test.extend(group[cut:])
    return train, test


def fit_tree(examples, max_depth: int = 12, min_leaf: int = 3) -> list[Node]:
    feats = [extract_ngram_features(e.name) for e in examples]
    vocab = [sorted({f[name] for f in feats}) for name in FEATURE_NAMES]
    index = [{v: i for i, v in enumerate(vs)} for vs in vocab]
    codes = np.array(
        [[index[k][f[name]] for k, name in enumerate(FEATURE_NAMES)] for f in feats], dtype=np.int64
    ).reshape(len(feats), len(FEATURE_NAMES))
    y = np.array([1.0 if e.gender == MALE else 0.0 for e in examples])
    return _Grower(codes, y, vocab, max_depth, min_leaf).grow()


def accuracy(model: GenderModel, examples) -> float:
    if not examples:
        return float("nan")
    hits = sum(predict(model, e.name)[0] == e.gender for e in examples)
    return hits / len(examples)


def train(
    examples,
    train_fraction: float = 0.9,
    seed: int = 0,
    max_depth: int = 12,
    min_leaf: int = 3,
) -> GenderModel:
    """
    Fit the tree on a seeded stratified split and record held-out accuracy.

    Raises
    ------
    TrainingError
        Fewer than two examples of either class, or a bad train fraction.
    """
    if not 0.0 < train_fraction < 1.0:
        raise TrainingError("train_fraction must lie strictly between 0 and 1")
    examples = _dedupe(examples)
    per_class = Counter(e.gender for e in examples)
    for gender in CLASSES:
        if per_class[gender] < 2:
            raise TrainingError(f"need at least 2 {gender} names, got {per_class[gender]}")
    train_set, test_set = split_examples(examples, train_fraction, seed)
    nodes = fit_tree(train_set, max_depth=max_depth, min_leaf=min_leaf)
    model = GenderModel(
        nodes=nodes,
        params={
            "train_fraction": train_fraction,
            "seed": seed,
            "max_depth": max_depth,
            "min_leaf": min_leaf,
            "criterion": "gini",
        },
    )
    model.metrics = {
        "n_examples": len(examples),
        "n_train": len(train_set),
        "n_test": len(test_set),
        "train_accuracy": accuracy(model, train_set),
        "test_accuracy": accuracy(model, test_set),
        "n_nodes": len(nodes),
        "depth": model.depth,
    }
    return model


def predict(model: GenderModel, name: str) -> tuple[str, float]:
    leaf = model.leaf_for(extract_ngram_features(name))
    return leaf.label, leaf.proportion


# --------------------------------------------------------------------------
# filling corpus gaps


@dataclass
class FillStats:
    already_known: int = 0
    inferred: int = 0
    below_floor: int = 0
    invalid_name: int = 0

    @property
    def total(self) -> int:
        return self.already_known + self.inferred + self.below_floor + self.invalid_name

    @property
    def coverage(self) -> float:
        return (self.already_known + self.inferred) / self.total if self.total else 1.0


def fill_missing_genders(bundles, model: GenderModel, confidence_floor: float = 0.0) -> FillStats:
    """Infer a gender for every character the corpus left unlabelled (in place)."""
    stats = FillStats()
    for bundle in bundles:
        for ch in bundle.characters:
            if ch.gender != UNKNOWN:
                stats.already_known += 1
                continue
            try:
                gender, conf = predict(model, ch.name)
            except InvalidNameError:
                stats.invalid_name += 1
                continue
            if conf >= confidence_floor:
                ch.gender = gender
                ch.gender_source = "inferred"
                stats.inferred += 1
            else:
                stats.below_floor += 1
    return stats


def write_accuracy_report(model: GenderModel, path) -> None:
    lines = [f"{k}={v:.6f}" if isinstance(v, float) else f"{k}={v}" for k, v in sorted(model.metrics.items())]
    lines += [f"param.{k}={v}" for k, v in sorted(model.params.items())]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
