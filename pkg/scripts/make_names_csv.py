"""Convert the OpenGenderTracking US baby-name table to a ``name,gender`` CSV.

The source table aggregates US Social Security Administration first-name
counts; it is redistributed in the ``gender-detector`` package as
gender_detector/data/usprocessed.csv. Each name is labelled with its majority
gender (M or F); names with equal counts are written as U and get dropped by
the loader.

    python scripts/make_names_csv.py usprocessed.csv data/names_us.csv
"""

import csv
import sys

LABELS = {"Male": "M", "Female": "F"}


def main(src, dst):
    with open(src, newline="", encoding="utf-8") as fh, open(dst, "w", newline="", encoding="utf-8") as out:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["name", "gender"])
        for row in csv.DictReader(fh):
            writer.writerow([row["Name"], LABELS.get(row["prob.gender"], "U")])


if __name__ == "__main__":
    main(*sys.argv[1:3])
