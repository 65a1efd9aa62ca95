"""Independent reference computations used by the tests.

Nothing here imports the code under test.
"""

import math

import numpy as np


def count_eigenvalues_below(a, x):
    """Sylvester inertia: negative pivots of LDL' of (A - xI) count eigenvalues < x."""
    m = np.array(a, dtype=float) - x * np.eye(len(a))
    n = len(m)
    negatives = 0
    for k in range(n):
        pivot = m[k, k]
        if pivot == 0.0:
            pivot = 1e-300
        if pivot < 0:
            negatives += 1
        for i in range(k + 1, n):
            factor = m[i, k] / pivot
            m[i, k + 1 :] -= factor * m[k, k + 1 :]
    return negatives


def eigenvalues_by_bisection(a, tol=1e-12):
    """All eigenvalues of a symmetric matrix, descending, by bisection on the inertia count."""
    a = np.asarray(a, dtype=float)
    n = len(a)
    radius = max(np.sum(np.abs(a), axis=1))  # Gershgorin bound
    out = []
    for k in range(n):
        # k-th smallest eigenvalue: smallest x with count_below(x) >= k+1
        lo, hi = -radius - 1.0, radius + 1.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if count_eigenvalues_below(a, mid) >= k + 1:
                hi = mid
            else:
                lo = mid
        out.append(0.5 * (lo + hi))
    return sorted(out, reverse=True)


def pearson(x, y):
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def random_correlation(rng, p, n=None):
    n = n or p + 5
    x = rng.standard_normal((n, p)) @ rng.standard_normal((p, p))
    return np.corrcoef(x, rowvar=False)


def brute_force_genre_scores(female_vectors, male_vectors, genre_vectors):
    """Direct nested-loop evaluation of the averaged summed cosines."""

    def cos(u, v):
        dot = sum(a * b for a, b in zip(u, v))
        nu = math.sqrt(sum(a * a for a in u))
        nv = math.sqrt(sum(b * b for b in v))
        return dot / (nu * nv)

    out = {}
    for side, lines in (("female", female_vectors), ("male", male_vectors)):
        if not lines:
            out[side] = None
            continue
        total = 0.0
        for d in lines:
            for g in genre_vectors:
                total += cos(g, d)
        out[side] = total / len(lines)
    return out


# --------------------------------------------------------------------------
# end-to-end feature oracle for the fixture corpus

_COARSE = (("NN", "noun"), ("VB", "verb"), ("JJ", "adj"))


def _split(path, width, sep=" +++$+++ "):
    rows = []
    with open(path, encoding="iso-8859-1") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.strip():
                rows.append([f.strip() for f in line.split(sep, width - 1)])
    return rows


def _walk_tree(nodes, name):
    n = " ".join(name.lower().split())
    feats = {"first1": n[:1], "first2": n[:2], "first3": n[:3], "last1": n[-1:], "last2": n[-2:], "last3": n[-3:]}
    node = nodes[0]
    while node["test"] is not None:
        t = node["test"]
        node = nodes[node["match"] if feats[t["feature"]] == t["value"] else node["other"]]
    return node["label"]


def reference_features(corpus_dir, model_nodes, lexicon, stopwords, tag, alpha=15.0, caps=0.733, bang=0.292):
    """
    Recompute the per-movie female feature rows straight from the raw fixture files.

    ``model_nodes`` is the node list of a serialized gender tree and ``tag``
    maps a word list to fine-grained tags. Returns ``{movie_id: row}`` for
    complete movies (ten floats, fixed column order) and the set of
    movie ids left incomplete.
    """
    import ast
    import csv
    import os
    import re

    d = os.fspath(corpus_dir)
    movies = _split(os.path.join(d, "movie_titles_metadata.txt"), 6)
    chars = _split(os.path.join(d, "movie_characters_metadata.txt"), 6)
    lines = _split(os.path.join(d, "movie_lines.txt"), 5)

    vectors = {}
    with open(os.path.join(d, "vectors.txt"), encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            parts = line.split()
            vectors.setdefault(parts[0], [float(v) for v in parts[1:]])

    def mean_vec(words):
        vs = [vectors[w] for w in words if w in vectors]
        if not vs:
            return None
        return [sum(c) / len(vs) for c in zip(*vs)]

    def cos(u, v):
        dot = sum(a * b for a, b in zip(u, v))
        return dot / (math.sqrt(sum(a * a for a in u)) * math.sqrt(sum(b * b for b in v)))

    female_crew = {}
    with open(os.path.join(d, "crew.csv"), encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            key = (" ".join(row["movie_title"].lower().split()), row["year"][:4])
            female_crew[key] = female_crew.get(key, 0) + (row["gender"].strip().lower() == "f")

    gender = {}
    for cid, name, mid, _t, g, _pos in chars:
        g = g.lower()
        gender[cid] = {"f": "female", "m": "male"}.get(g) or _walk_tree(model_nodes, name)

    out, incomplete = {}, set()
    for mid, title, year, _r, _v, genres in movies:
        labels = [g.lower() for g in ast.literal_eval(genres)]
        gvecs = [vectors[g] for g in labels if g in vectors][:3]
        fem_ids = {c[0] for c in chars if c[2] == mid and gender[c[0]] == "female"}
        fem_lines = [ln for ln in lines if ln[2] == mid and ln[1] in fem_ids]
        if not fem_lines or len(gvecs) < 3:
            if any(ln[2] == mid for ln in lines):
                incomplete.add(mid)
            continue
        tags = {"noun": 0, "verb": 0, "adj": 0}
        finals = []
        genre_sums = [0.0, 0.0, 0.0]
        n_embedded = 0
        for ln in fem_lines:
            text = ln[4]
            toks = [t.strip("'") for t in re.findall(r"[A-Za-z0-9']+", text)]
            toks = [t for t in toks if t]
            for fine in tag(toks):
                for prefix, kind in _COARSE:
                    if fine.startswith(prefix):
                        tags[kind] += 1
            x = 0.0
            for t in toks:
                if t.lower() in lexicon:
                    v = lexicon[t.lower()]
                    if len(t) >= 2 and t.isupper() and v != 0:
                        v += caps if v > 0 else -caps
                    x += v
            if x != 0:
                trailing = len(text.rstrip()) - len(text.rstrip().rstrip("!"))
                x += min(trailing, 3) * bang * (1 if x > 0 else -1)
            finals.append(x / math.sqrt(x * x + alpha))
            emb = mean_vec([t.lower() for t in toks if t.lower() not in stopwords])
            if emb is not None:
                n_embedded += 1
                for k, g in enumerate(gvecs):
                    genre_sums[k] += cos(g, emb)
        key = (" ".join(title.lower().split()), year[:4])
        out[mid] = [s / n_embedded for s in genre_sums] + [
            float(len(fem_ids)),
            float(len(fem_lines)),
            float(female_crew.get(key, 0)),
            sum(finals) / len(finals),
            float(tags["noun"]),
            float(tags["verb"]),
            float(tags["adj"]),
        ]
    return out, incomplete
