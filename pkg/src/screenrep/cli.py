"""
Command-line driver.

    screenrep ingest       --config run.cfg
    screenrep train-gender --config run.cfg
    screenrep analyze      --config run.cfg [--emit-intermediate]
    screenrep pca          --config run.cfg
    screenrep bechdel      --config run.cfg
    screenrep report       --config run.cfg

Exit codes: 0 success, 1 other error, 2 missing or unreadable input,
3 gender-model training failure, 4 not enough data for the analysis.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import fields
from pathlib import Path

from . import corpus, gender, mva
from ._io import sha256_file, write_csv
from .config import ConfigError, RunConfig, load_config
from .embedding import load_vectors
from .features import (
    AssemblyError,
    assemble_matrix,
    bechdel_score,
    ratio_reports,
    read_matrix,
    write_bechdel,
    write_matrix,
    write_ratios,
)
from .perceptron import PerceptronTagger
from .pipeline import Resources, analyze_all, analyze_lines
from .text import load_lexicon, load_stopwords, load_wordlist

log = logging.getLogger("screenrep")

EXIT_OK, EXIT_ERROR, EXIT_MISSING, EXIT_TRAINING, EXIT_DATA = 0, 1, 2, 3, 4
MANIFEST_FORMAT = "screenrep-manifest/1"


class MissingInputError(FileNotFoundError):
    def __init__(self, what, path=None):
        msg = f"missing {what}" + (f": {path}" if path is not None else "")
        super().__init__(msg)


def _require(path, what):
    if path is None:
        raise MissingInputError(what + " (not configured)")
    path = Path(path)
    if not path.is_file():
        raise MissingInputError(what, path)
    return path


def _stage_dir(cfg: RunConfig, stage: str) -> Path:
    d = Path(cfg.output) / stage
    d.mkdir(parents=True, exist_ok=True)
    return d


def _update_manifest(cfg: RunConfig, stage: str, inputs, outputs, started: float, summary: dict) -> Path:
    out = Path(cfg.output)
    path = out / "manifest.json"
    manifest = {"format": MANIFEST_FORMAT, "stages": {}}
    if path.exists():
        try:
            manifest = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError:
            pass
    manifest["format"] = MANIFEST_FORMAT
    manifest["config"] = cfg.snapshot()
    manifest.setdefault("stages", {})[stage] = {
        "inputs": {str(p): sha256_file(p) for p in inputs if p is not None},
        "outputs": {str(Path(p).relative_to(out)): sha256_file(p) for p in outputs},
        "seconds": round(time.perf_counter() - started, 3),
        "summary": summary,
    }
    path.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return path


# --------------------------------------------------------------------------
# shared loaders


def _bundles_path(cfg):
    return Path(cfg.output) / "ingest" / "bundles.json"


def _model_path(cfg):
    return Path(cfg.gender_model) if cfg.gender_model else Path(cfg.output) / "gender" / "model.json"


def _load_bundles(cfg):
    path = _require(_bundles_path(cfg), "ingest cache (run `screenrep ingest` first)")
    return path, corpus.bundles_from_json(path.read_text(encoding="utf-8"))


def _load_gendered_bundles(cfg):
    bundles_path, bundles = _load_bundles(cfg)
    model_path = _require(_model_path(cfg), "gender model (run `screenrep train-gender` first)")
    model = gender.GenderModel.load(model_path)
    stats = gender.fill_missing_genders(bundles, model, cfg.confidence_floor)
    return [bundles_path, model_path], bundles, stats


def _resources(cfg, need_vectors=True):
    inputs = []
    store = None
    if need_vectors:
        vec_path = _require(cfg.vectors, "word vectors")
        with open(vec_path, "rb") as fh:
            store = load_vectors(fh, cfg.vectors_format)
        for d in store.diagnostics:
            log.warning("vectors: %s", d)
        inputs.append(vec_path)
    for key in ("lexicon", "stoplist", "tagger", "male_reference", "named_blocklist"):
        p = getattr(cfg, key)
        if p is not None:
            inputs.append(_require(p, key))
    res = Resources(
        stoplist=load_stopwords(cfg.stoplist),
        lexicon=load_lexicon(cfg.lexicon),
        tagger=PerceptronTagger.load(cfg.tagger),
        store=store,
        alpha=cfg.alpha,
        caps_boost=cfg.caps_boost,
        exclamation_boost=cfg.exclamation_boost,
        genre_limit=cfg.genre_limit or None,
        male_reference=load_wordlist(cfg.male_reference, "male_reference.txt"),
        named_blocklist=load_wordlist(cfg.named_blocklist, "named_blocklist.txt"),
    )
    return inputs, res


# --------------------------------------------------------------------------
# commands


def cmd_ingest(cfg: RunConfig) -> int:
    started = time.perf_counter()
    paths = corpus.CorpusPaths(
        movies=_require(cfg.movies, "movie metadata file"),
        characters=_require(cfg.characters, "character metadata file"),
        lines=_require(cfg.lines, "lines file"),
        conversations=_require(cfg.conversations, "conversations file"),
        crew=_require(cfg.crew, "crew CSV") if cfg.crew is not None else None,
    )
    bundles, report = corpus.load_corpus(paths, cfg.delimiter, cfg.encoding)
    out = _stage_dir(cfg, "ingest")
    cache = out / "bundles.json"
    cache.write_text(corpus.bundles_to_json(bundles), encoding="utf-8")
    written = [
        cache,
        corpus.write_exclusions(report, out / "exclusions.csv"),
        write_csv(out / "crew_join_misses.csv", ["movie_id", "reason"],
                  [[m, "no crew/financial row for normalized title + year"] for m in report.unmatched_crew]),
    ]
    diag_path = out / "diagnostics.txt"
    diag_path.write_text("".join(f"{d}\n" for d in report.diagnostics), encoding="utf-8")
    written.append(diag_path)
    _update_manifest(
        cfg, "ingest",
        [paths.movies, paths.characters, paths.lines, paths.conversations, paths.crew],
        written, started,
        {"bundles": len(bundles), "excluded": len(report.excluded),
         "unmatched_crew": len(report.unmatched_crew), "diagnostics": len(report.diagnostics)},
    )
    log.info("ingested %d movies (%d excluded)", len(bundles), len(report.excluded))
    return EXIT_OK


def cmd_train_gender(cfg: RunConfig) -> int:
    started = time.perf_counter()
    names = _require(cfg.names, "names CSV")
    examples = gender.load_names_csv(names)
    try:
        model = gender.train(examples, cfg.train_fraction, cfg.seed, cfg.max_depth, cfg.min_leaf)
    except gender.TrainingError as exc:
        log.error("training failed: %s", exc)
        return EXIT_TRAINING
    out = _stage_dir(cfg, "gender")
    model_path = out / "model.json"
    model.save(model_path)
    report = out / "accuracy.txt"
    gender.write_accuracy_report(model, report)
    _update_manifest(cfg, "train-gender", [names], [model_path, report], started, dict(model.metrics))
    log.info("train accuracy %.4f, held-out accuracy %.4f",
             model.metrics["train_accuracy"], model.metrics["test_accuracy"])
    return EXIT_OK


def _write_fill_stats(path, stats) -> Path:
    path.write_text(
        f"already_known={stats.already_known}\ninferred={stats.inferred}\n"
        f"below_floor={stats.below_floor}\ninvalid_name={stats.invalid_name}\n"
        f"coverage={stats.coverage:.6f}\n",
        encoding="utf-8",
    )
    return path


def cmd_analyze(cfg: RunConfig) -> int:
    started = time.perf_counter()
    inputs, bundles, stats = _load_gendered_bundles(cfg)
    res_inputs, res = _resources(cfg)
    analyses = analyze_all(bundles, res, cfg.workers)
    out = _stage_dir(cfg, "analyze")
    written = [_write_fill_stats(out / "gender_fill.txt", stats)]

    vectors = [a.features for a in analyses]
    try:
        matrix = assemble_matrix(vectors, cfg.extra)
    except AssemblyError as exc:
        log.error("%s", exc)
        return EXIT_DATA
    written.append(write_matrix(matrix, out / "features.csv"))
    written.append(write_csv(out / "feature_exclusions.csv", ["movie_id", "reason"], matrix.excluded))
    written.append(write_bechdel([a.bechdel for a in analyses], out / "bechdel.csv"))
    pos_all = {k: v for a in analyses for k, v in a.pos_by_line.items()}
    written.append(write_ratios(ratio_reports(bundles, pos_all), out / "ratios.csv"))
    written.append(write_csv(
        out / "financials.csv", ["movie_id", "budget", "revenue", "roi"],
        [[b.movie_id, b.financials.budget, b.financials.revenue, b.financials.roi]
         for b in bundles if b.financials is not None],
    ))
    written.append(write_csv(
        out / "genre_scores.csv",
        ["movie_id", "genres", "male_tag", "female_tag", "male_lines", "female_lines"],
        [[a.movie_id, ";".join(a.genre_scores.genres), a.genre_scores.male, a.genre_scores.female,
          a.genre_scores.n_male, a.genre_scores.n_female] for a in analyses],
    ))
    if cfg.emit_intermediate:
        written.append(write_csv(
            out / "line_sentiment.csv", ["movie_id", "line_id", "raw_sum", "final"],
            [[a.movie_id, lid, s.raw_sum, s.final] for a in analyses for lid, s in a.sentiment_by_line.items()],
        ))
        written.append(write_csv(
            out / "line_pos.csv", ["movie_id", "line_id", "nouns", "verbs", "adjectives", "other"],
            [[a.movie_id, lid, p.nouns, p.verbs, p.adjectives, p.other]
             for a in analyses for lid, p in a.pos_by_line.items()],
        ))
    _update_manifest(
        cfg, "analyze", inputs + res_inputs, written, started,
        {"movies": len(bundles), "matrix_rows": len(matrix.row_keys), "matrix_excluded": len(matrix.excluded),
         "bechdel_passes": sum(a.bechdel.passes for a in analyses), "gender_coverage": round(stats.coverage, 6)},
    )
    return EXIT_OK


def cmd_pca(cfg: RunConfig) -> int:
    started = time.perf_counter()
    path = _require(cfg.features or Path(cfg.output) / "analyze" / "features.csv", "feature matrix")
    matrix = read_matrix(path)
    if len(matrix.row_keys) < 3:
        log.error("feature matrix has %d complete rows; PCA needs at least 3", len(matrix.row_keys))
        return EXIT_DATA
    try:
        report = mva.run_pca(matrix.values, matrix.columns, matrix.row_keys, **mva.parse_rule(cfg.retention))
    except mva.InsufficientDataError as exc:
        log.error("%s", exc)
        return EXIT_DATA
    report.labels = mva.suggested_labels(report.loadings, report.columns, cfg.label_threshold)
    written = mva.write_pca_report(report, _stage_dir(cfg, "pca"))
    for note in report.notes:
        log.warning("pca: %s", note)
    _update_manifest(
        cfg, "pca", [path], written, started,
        {"n": report.correlation.n, "p": len(report.columns), "retained": report.k,
         "kmo": round(report.adequacy.kmo, 6), "notes": report.notes},
    )
    return EXIT_OK


def cmd_bechdel(cfg: RunConfig) -> int:
    started = time.perf_counter()
    inputs, bundles, _ = _load_gendered_bundles(cfg)
    male_ref = load_wordlist(cfg.male_reference, "male_reference.txt")
    blocklist = load_wordlist(cfg.named_blocklist, "named_blocklist.txt")
    results = [bechdel_score(b, male_ref, blocklist) for b in bundles]
    path = write_bechdel(results, _stage_dir(cfg, "bechdel") / "bechdel.csv")
    _update_manifest(cfg, "bechdel", inputs, [path], started,
                     {"movies": len(results), "passes": sum(r.passes for r in results)})
    return EXIT_OK


def cmd_report(cfg: RunConfig) -> int:
    started = time.perf_counter()
    inputs, bundles, _ = _load_gendered_bundles(cfg)
    res_inputs, res = _resources(cfg, need_vectors=False)
    pos_all = {}
    for b in bundles:
        pos_all.update(analyze_lines(b, res, with_embeddings=False).pos_by_line)
    path = write_ratios(ratio_reports(bundles, pos_all), _stage_dir(cfg, "report") / "ratios.csv")
    _update_manifest(cfg, "report", inputs + res_inputs, [path], started, {"movies": len(bundles)})
    return EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest,
    "train-gender": cmd_train_gender,
    "analyze": cmd_analyze,
    "pca": cmd_pca,
    "bechdel": cmd_bechdel,
    "report": cmd_report,
}


def _option_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("-v", "--verbose", action="store_true")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.name == "emit_intermediate":
            common.add_argument(flag, action="store_true", help="also write per-line CSVs")
        else:
            common.add_argument(flag, dest=f.name, metavar=f.name.upper())
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _option_parser()
    parser = argparse.ArgumentParser(prog="screenrep", description=__doc__.splitlines()[1], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], argument_default=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config", None)
    verbose = args.pop("verbose", False)
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(config_path, args)
        Path(cfg.output).mkdir(parents=True, exist_ok=True)
        return COMMANDS[command](cfg)
    except (MissingInputError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"screenrep: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except corpus.CorpusError as exc:
        # stale or foreign cache format
        print(f"screenrep: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (ConfigError, ValueError) as exc:
        print(f"screenrep: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
