import csv
import hashlib
import json
import shutil
from pathlib import Path

import pytest

from oracles import reference_features
from screenrep import cli
from screenrep.perceptron import PerceptronTagger
from screenrep.text import load_lexicon, load_stopwords

DATA = Path(__file__).parent / "data"
FIXTURE = DATA / "corpus"
GOLDEN = DATA / "golden"
CONFIG = FIXTURE / "run.cfg"
STAGES = ["ingest", "train-gender", "analyze", "pca", "bechdel", "report"]


def run(*args):
    return cli.main([str(a) for a in args])


def run_all(out, *extra):
    for stage in STAGES:
        assert run(stage, "--config", CONFIG, "--output", out, *extra) == 0, stage


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    run_all(out, "--emit-intermediate")
    return out


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# -- end to end -------------------------------------------------------------------------


@pytest.mark.parametrize(
    "produced, golden",
    [
        ("analyze/features.csv", "features.csv"),
        ("analyze/bechdel.csv", "bechdel.csv"),
        ("analyze/ratios.csv", "ratios.csv"),
        ("pca/adequacy.csv", "pca_adequacy.csv"),
        ("pca/variance.csv", "pca_variance.csv"),
        ("pca/loadings.csv", "pca_loadings.csv"),
        ("pca/scores.csv", "pca_scores.csv"),
    ],
)
def test_outputs_match_golden_files(pipeline, produced, golden):
    assert (pipeline / produced).read_bytes() == (GOLDEN / golden).read_bytes()


def test_features_match_independent_recomputation(pipeline):
    nodes = json.loads((pipeline / "gender" / "model.json").read_text())["nodes"]
    want, incomplete = reference_features(FIXTURE, nodes, load_lexicon(), load_stopwords(), PerceptronTagger.load().tag)
    rows = _rows(pipeline / "analyze" / "features.csv")
    assert len(rows[0]) == 11
    got = {r[0]: [float(v) for v in r[1:]] for r in rows[1:]}
    assert sorted(got) == sorted(want)
    for mid, row in want.items():
        assert got[mid] == pytest.approx(row, abs=1e-6), mid
    assert {r[0] for r in _rows(pipeline / "analyze" / "feature_exclusions.csv")[1:]} == incomplete


def test_ingest_reports_exclusions(pipeline):
    assert _rows(pipeline / "ingest" / "exclusions.csv")[1:] == [["m14", "no dialogue lines"], ["m15", "no characters"]]
    assert _rows(pipeline / "ingest" / "crew_join_misses.csv")[1][0] == "m4"


def test_pca_outputs(pipeline):
    pca = pipeline / "pca"
    for name in ("adequacy", "variance", "loadings", "scree", "scores", "component_labels"):
        assert (pca / f"{name}.csv").exists()
    assert _rows(pca / "variance.csv")[-1][-1] == "100.000000"


def test_gender_fill_reports_inferred_characters(pipeline):
    text = (pipeline / "analyze" / "gender_fill.txt").read_text()
    assert "inferred=5" in text and "coverage=1.000000" in text


def test_intermediate_files(pipeline, tmp_path):
    assert (pipeline / "analyze" / "line_sentiment.csv").exists()
    assert (pipeline / "analyze" / "line_pos.csv").exists()
    out = tmp_path / "plain"
    run_all(out)
    assert not (out / "analyze" / "line_sentiment.csv").exists()
    assert (out / "analyze" / "features.csv").read_bytes() == (pipeline / "analyze" / "features.csv").read_bytes()


def _digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def test_manifest_lists_every_file(pipeline):
    manifest = json.loads((pipeline / "manifest.json").read_text())
    assert manifest["format"] == cli.MANIFEST_FORMAT
    listed = {}
    for stage in manifest["stages"].values():
        listed.update(stage["outputs"])
    on_disk = {str(p.relative_to(pipeline)) for p in pipeline.rglob("*") if p.is_file() and p.name != "manifest.json"}
    assert set(listed) == on_disk
    for rel, digest in listed.items():
        assert _digest(pipeline / rel) == digest
    assert len(manifest["stages"]["ingest"]["inputs"]) == 5


def test_ingest_without_crew_has_four_inputs(tmp_path):
    assert run("ingest", "--config", CONFIG, "--output", tmp_path, "--crew", "") == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert len(manifest["stages"]["ingest"]["inputs"]) == 4


def test_rerun_is_byte_identical(pipeline, tmp_path):
    out = tmp_path / "again"
    run_all(out, "--emit-intermediate")
    first = json.loads((pipeline / "manifest.json").read_text())
    second = json.loads((out / "manifest.json").read_text())
    for stage in STAGES:
        assert first["stages"][stage]["outputs"] == second["stages"][stage]["outputs"], stage


def test_parallel_workers_give_identical_output(pipeline, tmp_path):
    out = tmp_path / "par"
    shutil.copytree(pipeline / "ingest", out / "ingest")
    shutil.copytree(pipeline / "gender", out / "gender")
    assert run("analyze", "--config", CONFIG, "--output", out, "--workers", "2") == 0
    for name in ("features.csv", "bechdel.csv", "genre_scores.csv"):
        assert (out / "analyze" / name).read_bytes() == (pipeline / "analyze" / name).read_bytes()


def test_flags_override_config(tmp_path):
    assert run("train-gender", "--config", CONFIG, "--output", tmp_path, "--seed", "3") == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config"]["seed"] == 3
    assert "param.seed=3" in (tmp_path / "gender" / "accuracy.txt").read_text()


def test_train_gender_rerun_identical(tmp_path):
    for d in ("a", "b"):
        assert run("train-gender", "--config", CONFIG, "--output", tmp_path / d) == 0
    assert (tmp_path / "a/gender/model.json").read_bytes() == (tmp_path / "b/gender/model.json").read_bytes()


# -- exit codes -----------------------------------------------------------------------------


def test_missing_lines_file_exits_2(tmp_path, capsys):
    missing = tmp_path / "nope.txt"
    assert run("ingest", "--config", CONFIG, "--output", tmp_path, "--lines", missing) == 2
    assert str(missing) in capsys.readouterr().err


def test_missing_config_exits_2(tmp_path):
    assert run("ingest", "--config", tmp_path / "absent.cfg") == 2


def test_analyze_without_vectors_exits_2(pipeline, tmp_path, capsys):
    out = tmp_path / "nv"
    shutil.copytree(pipeline / "ingest", out / "ingest")
    shutil.copytree(pipeline / "gender", out / "gender")
    assert run("analyze", "--config", CONFIG, "--output", out, "--vectors", tmp_path / "gone.txt") == 2
    assert "word vectors" in capsys.readouterr().err


def test_analyze_without_ingest_exits_2(tmp_path, capsys):
    assert run("analyze", "--config", CONFIG, "--output", tmp_path) == 2
    assert "ingest" in capsys.readouterr().err


def test_stale_cache_exits_2(pipeline, tmp_path):
    out = tmp_path / "stale"
    (out / "ingest").mkdir(parents=True)
    (out / "ingest" / "bundles.json").write_text('{"format": "screenrep-bundles/0", "bundles": []}')
    shutil.copytree(pipeline / "gender", out / "gender")
    assert run("bechdel", "--config", CONFIG, "--output", out) == 2


def test_single_class_names_exit_3(tmp_path):
    names = tmp_path / "names.csv"
    names.write_text("name,gender\n" + "".join(f"n{i}a,F\n" for i in range(20)))
    assert run("train-gender", "--config", CONFIG, "--output", tmp_path, "--names", names) == 3


def _matrix(path, rows, columns=("a", "u")):
    path.write_text("movie_id," + ",".join(columns) + "\n" + "".join(
        f"r{i}," + ",".join(f"{v:.6f}" for v in row) + "\n" for i, row in enumerate(rows)))
    return path


def test_pca_with_two_rows_exits_4(tmp_path):
    f = _matrix(tmp_path / "f.csv", [[1, 2], [2, 1]])
    assert run("pca", "--features", f, "--output", tmp_path) == 4


def test_pca_with_too_few_rows_for_columns_exits_4(tmp_path):
    f = _matrix(tmp_path / "f.csv", [[1, 2, 3], [2, 1, 0], [0, 5, 1]], ("a", "b", "c"))
    assert run("pca", "--features", f, "--output", tmp_path) == 4


def test_pca_identity_like_flags_no_structure(tmp_path):
    f = _matrix(tmp_path / "f.csv", [[1, 1], [1, -1], [-1, 1], [-1, -1]])
    assert run("pca", "--features", f, "--output", tmp_path) == 0
    rows = {r[1]: r[2] for r in _rows(tmp_path / "pca" / "adequacy.csv")[1:]}
    assert rows["no_structure"] == "1" and rows["kmo"] == "0.000000"


def test_pca_rerun_identical(tmp_path):
    f = _matrix(tmp_path / "f.csv", [[1, 2], [2, 2.5], [3, 3.7], [4, 4.1], [5, 6.0]])
    for d in ("a", "b"):
        assert run("pca", "--features", f, "--output", tmp_path / d) == 0
    for p in (tmp_path / "a" / "pca").iterdir():
        assert p.read_bytes() == (tmp_path / "b" / "pca" / p.name).read_bytes()


def test_bad_config_value_exits_1(tmp_path):
    assert run("pca", "--config", CONFIG, "--output", tmp_path, "--alpha", "-1") == 1


def test_unknown_retention_rule_exits_1(tmp_path):
    f = _matrix(tmp_path / "f.csv", [[1, 2], [2, 2.5], [3, 3.7], [4, 4.1]])
    assert run("pca", "--features", f, "--output", tmp_path, "--retention", "bogus") == 1


def test_retention_flag(tmp_path):
    f = _matrix(tmp_path / "f.csv", [[1, 2], [2, 2.5], [3, 3.7], [4, 4.1]])
    assert run("pca", "--features", f, "--output", tmp_path, "--retention", "fixed:2") == 0
    assert _rows(tmp_path / "pca" / "loadings.csv")[0][1:] == ["PC1", "PC2"]


def test_env_config(monkeypatch, tmp_path):
    monkeypatch.setenv("SCREENREP_CONFIG", str(CONFIG))
    assert run("ingest", "--output", tmp_path) == 0
    assert (tmp_path / "ingest" / "bundles.json").exists()


def test_help_lists_commands(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    assert all(c in out for c in STAGES)
