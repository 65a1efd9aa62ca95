"""
Run every pipeline stage in order for one config file.

    python3 scripts/run_pipeline.py tests/data/corpus/run.cfg --output out/fixture

Stops at the first stage that exits non-zero and returns its exit code.
Extra arguments after ``--`` are passed to every stage.
"""

import argparse
import sys

from screenrep import cli

STAGES = ("ingest", "train-gender", "analyze", "pca", "bechdel", "report")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    ap.add_argument("config")
    ap.add_argument("--output", default="out")
    ap.add_argument("extra", nargs=argparse.REMAINDER)
    args = ap.parse_args(argv)
    extra = [a for a in args.extra if a != "--"]
    for stage in STAGES:
        code = cli.main([stage, "--config", args.config, "--output", args.output, *extra])
        print(f"{stage:<13} exit {code}")
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
