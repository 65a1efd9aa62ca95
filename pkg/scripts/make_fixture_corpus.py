"""
Write the small synthetic corpus used by the test-suite.

    python3 scripts/make_fixture_corpus.py tests/data/corpus

Everything is drawn from a seeded generator, so rerunning reproduces the
committed files byte for byte. The corpus has 16 movies: 14 complete ones,
one with no dialogue and one with no characters. Among the complete movies
one has only male speakers and one lists two genres, so twelve rows reach
the feature matrix.
"""

import argparse
import csv
import random
from pathlib import Path

DELIM = " +++$+++ "

FEMALE_NAMES = ["anna", "maria", "julia", "sofia", "laura", "emma", "clara", "nina", "rosa", "elena", "lucy", "kate"]
MALE_NAMES = ["john", "peter", "mark", "paul", "tom", "jack", "david", "frank", "carl", "oscar", "ben", "hugo"]
# names the fixture leaves without a gender; the trained model decides
UNKNOWN_NAMES = ["lena", "tina", "victor", "bruno", "dora", "igor"]
GENRES = ["drama", "comedy", "romance", "thriller", "crime", "horror", "action", "mystery", "war", "fantasy"]

NOUNS = ["house", "car", "money", "night", "city", "letter", "dog", "river", "door", "party", "job", "weather"]
VERBS = ["run", "see", "take", "find", "call", "leave", "know", "want"]
ADJS = ["big", "red", "old", "quiet", "strange", "cold"]
FEELING = ["good", "bad", "love", "hate", "happy", "awful", "great", "sorry", "nice", "terrible"]
FUNCTION = ["the", "a", "i", "you", "we", "it", "to", "and", "is", "not"]
MALE_TOPIC = ["he", "him", "his", "husband", "father", "brother"]


def sentence(rng: random.Random, male_topic: bool = False) -> str:
    words = [rng.choice(FUNCTION), rng.choice(ADJS), rng.choice(NOUNS)]
    if rng.random() < 0.7:
        words += [rng.choice(VERBS), rng.choice(FUNCTION), rng.choice(NOUNS)]
    if rng.random() < 0.6:
        words.insert(rng.randrange(len(words) + 1), rng.choice(FEELING))
    if male_topic:
        words.insert(rng.randrange(len(words) + 1), rng.choice(MALE_TOPIC))
    text = " ".join(words)
    text = text[0].upper() + text[1:]
    if rng.random() < 0.2:
        text = text.replace("good", "GOOD").replace("bad", "BAD")
    return text + rng.choice([".", ".", "?", "!", "!!"])


def build(rng: random.Random):
    movies, characters, lines, conversations, crew = [], [], [], [], []
    line_no = 100
    char_no = 0
    for m in range(16):
        mid = f"m{m}"
        title = f"picture number {m}"
        year = 1990 + (m % 4) * 5
        genres = rng.sample(GENRES, 2 if m == 12 else 3)
        movies.append([mid, title, str(year), f"{rng.uniform(4, 9):.1f}", str(rng.randint(500, 90000)), repr(genres)])
        if m == 15:
            continue  # no characters at all
        n_f = 0 if m == 13 else rng.randint(2, 4)
        n_m = rng.randint(2, 4)
        cast = []
        for g, pool, count in (("f", FEMALE_NAMES, n_f), ("m", MALE_NAMES, n_m)):
            for name in rng.sample(pool, count):
                cast.append((f"u{char_no}", name.upper(), g))
                char_no += 1
        if m % 3 == 0 and m != 13:
            cast.append((f"u{char_no}", rng.choice(UNKNOWN_NAMES).upper(), "?"))
            char_no += 1
        if m == 2:
            cast.append((f"u{char_no}", "OLD WOMAN", "f"))
            char_no += 1
        for pos, (cid, name, g) in enumerate(cast, 1):
            characters.append([cid, name, mid, title, g, str(pos) if pos < 4 else "?"])
        if m == 14:
            continue  # characters but no dialogue
        by_char = {cid: [] for cid, _, _ in cast}
        for _ in range(rng.randint(8, 20)):
            a, b = rng.sample(cast, 2)
            topic = rng.random() < 0.4
            ids = []
            for turn in range(rng.randint(2, 4)):
                speaker = (a, b)[turn % 2]
                lid = f"L{line_no}"
                line_no += 1
                text = sentence(rng, topic and turn == 0)
                lines.append([lid, speaker[0], mid, speaker[1], text])
                by_char[speaker[0]].append(lid)
                ids.append(lid)
            conversations.append([a[0], b[0], mid, repr(ids)])
        if m == 7:
            # the last field absorbs a stray delimiter inside dialogue text
            lid = f"L{line_no}"
            line_no += 1
            lines.append([lid, cast[0][0], mid, cast[0][1], "A +++$+++ B"])
        if m == 4:
            continue  # no crew or financial row
        budget = 0 if m == 9 else rng.randint(5, 90) * 1_000_000
        revenue = rng.randint(1, 300) * 1_000_000
        shown = title.upper() if m % 2 else "  " + title.title() + " "
        for _ in range(rng.randint(2, 6)):
            g = rng.choice(["f", "m", "m", ""])
            crew.append([shown, str(year), f"crew{rng.randint(1, 999)}", rng.choice(["Director", "Editor", "Writer"]),
                         g, str(budget), str(revenue)])
    return movies, characters, lines, conversations, crew


def write_vectors(path: Path, rng: random.Random, dim: int = 8) -> None:
    vocab = sorted(set(NOUNS + VERBS + ADJS + FEELING + GENRES + MALE_TOPIC))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{len(vocab)} {dim}\n")
        for word in vocab:
            fh.write(word + " " + " ".join(f"{rng.gauss(0, 1):.6f}" for _ in range(dim)) + "\n")


def write_names(path: Path) -> None:
    rows = [(n.title(), "F") for n in FEMALE_NAMES + ["lena", "tina", "dora", "mia", "eva", "lisa", "sara"]]
    rows += [(n.title(), "M") for n in MALE_NAMES + ["victor", "bruno", "igor", "leon", "max", "ivan", "otto"]]
    rows += [("Robin", "U")]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["name", "gender"])
        w.writerows(sorted(rows))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    ap.add_argument("outdir", type=Path)
    ap.add_argument("--seed", type=int, default=11)
    args = ap.parse_args(argv)
    rng = random.Random(args.seed)
    out = args.outdir
    out.mkdir(parents=True, exist_ok=True)
    movies, characters, lines, conversations, crew = build(rng)
    for name, rows in (("movie_titles_metadata.txt", movies), ("movie_characters_metadata.txt", characters),
                       ("movie_lines.txt", lines), ("movie_conversations.txt", conversations)):
        with open(out / name, "w", encoding="iso-8859-1", newline="\n") as fh:
            fh.writelines(DELIM.join(r) + "\n" for r in rows)
    with open(out / "crew.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["movie_title", "year", "crew_name", "job_title", "gender", "budget", "revenue"])
        w.writerows(crew)
    write_vectors(out / "vectors.txt", rng)
    write_names(out / "names.csv")
    (out / "run.cfg").write_text(
        "# fixture run; paths are relative to this file\n"
        "movies = movie_titles_metadata.txt\n"
        "characters = movie_characters_metadata.txt\n"
        "lines = movie_lines.txt\n"
        "conversations = movie_conversations.txt\n"
        "crew = crew.csv\n"
        "names = names.csv\n"
        "vectors = vectors.txt\n"
        "train_fraction = 0.75\n"
        "seed = 7\n"
        "min_leaf = 1\n",
        encoding="utf-8",
    )


if __name__ == "__main__":
    main()
