"""End-to-end command-line behavior: each subcommand's happy path, option
resolution across flag/env/config layers, and the error exit contract."""
import json

import numpy as np
import pytest

from lexloop.classifier import ClassifierModel, save_model
from lexloop.cli import main
from lexloop.embedding import EmbeddingStore, save_vectors

from conftest import write_lines

TABLE2_LEXICON = [
    "good\ta\thaving desirable or positive qualities",
    "good\tn\tbenefit",
    "quality\tn\tan essential and distinguishing attribute",
    "soft\ta\tyielding readily to pressure",
    "chewy\ta\trequiring much chewing",
    "taffy\tn\tchewy candy",
    "cold\ta\thaving a low temperature",
    "cold\tn\ta mild viral infection",
    "water\tn\ta clear liquid",
]


def run_ok(capsys, argv):
    assert main(argv) == 0
    return capsys.readouterr()


def run_err(capsys, argv):
    assert main(argv) == 2
    err = capsys.readouterr().err
    assert err.startswith("lexloop: ")
    return err


# --- ingest -------------------------------------------------------------------


def test_ingest_extracts_validated_adjectives(tmp_path, capsys):
    lexicon = write_lines(tmp_path / "lexicon.tsv", TABLE2_LEXICON)
    corpus = write_lines(
        tmp_path / "reviews.txt",
        ["I have found them all to be of good quality.", "soft chewy taffy"],
    )
    out = tmp_path / "candidates.txt"
    captured = run_ok(
        capsys,
        ["ingest", "--corpus", str(corpus), "--lexicon", str(lexicon), "--out", str(out)],
    )
    assert out.read_text() == "chewy\ngood\n"
    assert "2 candidate words" in captured.out


def test_ingest_empty_corpus_writes_empty_file(tmp_path, capsys):
    lexicon = write_lines(tmp_path / "lexicon.tsv", TABLE2_LEXICON)
    corpus = write_lines(tmp_path / "reviews.txt", ["water arrived"])
    out = tmp_path / "candidates.txt"
    captured = run_ok(
        capsys,
        ["ingest", "--corpus", str(corpus), "--lexicon", str(lexicon), "--out", str(out)],
    )
    assert out.read_text() == ""
    assert "0 candidate words" in captured.out


# --- run ----------------------------------------------------------------------


def run_args(world, out, extra=()):
    return [
        "run",
        "--oracle", str(world.truth_path),
        "--lexicon", str(world.lexicon_path),
        "--vectors", str(world.vectors_path),
        "--testset", str(world.testset_path),
        "--out", str(out),
        "--iterations", "2",
        "--pos-quota", "5",
        "--neg-quota", "5",
        "--cap", "20",
        "--epochs", "6",
        "--lr-drop-epoch", "3",
        "--batch-size", "8",
        *extra,
    ]


def test_run_single_seed_prints_session_table(small_world, tmp_path, capsys):
    out = tmp_path / "runs"
    captured = run_ok(capsys, run_args(small_world, out, ["--seeds", "1"]))
    assert "strategy: entropy  seed: 0" in captured.out
    assert "best iteration by testset macro-F1:" in captured.out
    assert "seed 0: session written to" in captured.err
    session_dir = out / "entropy-seed0"
    for artifact in ("config", "pool", "annotations.log", "metrics.jsonl", "report"):
        assert (session_dir / artifact).exists(), artifact


def test_run_multi_seed_prints_aggregate(small_world, tmp_path, capsys):
    captured = run_ok(
        capsys, run_args(small_world, tmp_path / "runs", ["--seeds", "2"])
    )
    assert "seeds: 0, 1" in captured.out
    assert "annotations per iteration:" in captured.out


def test_run_records_format_is_json(small_world, tmp_path, capsys):
    captured = run_ok(
        capsys,
        run_args(small_world, tmp_path / "runs", ["--seeds", "1", "--format", "records"]),
    )
    lines = [l for l in captured.out.splitlines() if l.strip()]
    header = json.loads(lines[0])
    assert header["kind"] == "session"
    assert {json.loads(l)["kind"] for l in lines[1:]} == {"iteration"}


def test_run_rejects_unknown_strategy(small_world, tmp_path, capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(run_args(small_world, tmp_path / "runs", ["--strategy", "mystery"]))
    assert excinfo.value.code == 2
    assert "invalid choice" in capsys.readouterr().err


def test_run_missing_oracle_file(small_world, tmp_path, capsys):
    argv = run_args(small_world, tmp_path / "runs", ["--seeds", "1"])
    argv[argv.index("--oracle") + 1] = str(tmp_path / "nope.tsv")
    assert "oracle truth file not found" in run_err(capsys, argv)


# --- eval ---------------------------------------------------------------------


@pytest.fixture
def eval_world(tmp_path):
    lexicon = write_lines(tmp_path / "lex.tsv", ["alpha\ta\talpha", "beta\ta\tbeta"])
    vectors = tmp_path / "vec.txt"
    save_vectors(
        EmbeddingStore(
            2, {"alpha": np.array([5.0, 0.0]), "beta": np.array([-5.0, 0.0])}
        ),
        vectors,
    )
    testset = write_lines(tmp_path / "test.tsv", ["alpha\t1", "beta\t0"])
    model_path = tmp_path / "model.ckpt"
    save_model(
        ClassifierModel(2, 0, {"w_out": np.array([1.0, 0.0]), "b_out": np.zeros(1)}),
        model_path,
    )
    return {
        "lexicon": lexicon,
        "vectors": vectors,
        "testset": testset,
        "model": model_path,
    }


def eval_args(paths, extra=()):
    return [
        "eval",
        "--model", str(paths["model"]),
        "--testset", str(paths["testset"]),
        "--lexicon", str(paths["lexicon"]),
        "--vectors", str(paths["vectors"]),
        *extra,
    ]


def test_eval_table_shows_perfect_scores(eval_world, capsys):
    captured = run_ok(capsys, eval_args(eval_world))
    assert "tp=1 fp=0 fn=0 tn=1 total=2" in captured.out
    assert captured.out.count("1.00") >= 6  # P/R/F1 for both classes


def test_eval_records_format(eval_world, capsys):
    captured = run_ok(capsys, eval_args(eval_world, ["--format", "records"]))
    rows = [json.loads(l) for l in captured.out.splitlines() if l.strip()]
    assert rows[0] == {"kind": "confusion", "tp": 1, "fp": 0, "fn": 0, "tn": 1}
    assert rows[1]["class"] == "mental"
    assert rows[1]["f1"] == 1.0


# --- senticompare ----------------------------------------------------------------


@pytest.fixture
def senti_files(tmp_path):
    swn = write_lines(
        tmp_path / "senti.tsv",
        [
            "# POS\tID\tPosScore\tNegScore\tSynsetTerms\tGloss",
            "a\t00000001\t0.75\t0.125\tgloomy#1\tsad and dark",
            "a\t00000002\t0\t0\tdamp#1 moist#2\tslightly wet",
        ],
    )
    mpc = write_lines(tmp_path / "mpc.tsv", ["gloomy\t1", "damp\t0"])
    return {"swn": swn, "mpc": mpc}


def test_senticompare_table(senti_files, capsys):
    captured = run_ok(
        capsys,
        ["senticompare", "--mpc", str(senti_files["mpc"]), "--swn", str(senti_files["swn"])],
    )
    assert "mental" in captured.out and "physical" in captured.out
    assert "100%" in captured.out


def test_senticompare_records(senti_files, capsys):
    captured = run_ok(
        capsys,
        [
            "senticompare",
            "--mpc", str(senti_files["mpc"]),
            "--swn", str(senti_files["swn"]),
            "--format", "records",
        ],
    )
    rows = [json.loads(l) for l in captured.out.splitlines() if l.strip()]
    assert rows[0]["kind"] == "crosstab_row"
    assert rows[0]["percentages"]["subjective"] == 100


# --- export ---------------------------------------------------------------------


def test_export_lists_every_annotation(small_world, tmp_path, capsys):
    run_ok(capsys, run_args(small_world, tmp_path / "runs", ["--seeds", "1"]))
    session_dir = tmp_path / "runs" / "entropy-seed0"
    captured = run_ok(
        capsys, ["export", "--session", str(session_dir), "--format", "records"]
    )
    rows = [json.loads(l) for l in captured.out.splitlines() if l.strip()]
    log_lines = (session_dir / "annotations.log").read_text().splitlines()
    assert len(rows) == len(log_lines)
    assert set(rows[0]) == {"word", "label", "iteration", "counted"}

    table = run_ok(capsys, ["export", "--session", str(session_dir)]).out
    assert table.splitlines()[0].startswith("word")


def test_export_missing_session(tmp_path, capsys):
    assert "no session at" in run_err(
        capsys, ["export", "--session", str(tmp_path / "ghost")]
    )


# --- option resolution -------------------------------------------------------------


def test_env_variable_supplies_missing_option(senti_files, capsys, monkeypatch):
    monkeypatch.setenv("LEXLOOP_FORMAT", "records")
    captured = run_ok(
        capsys,
        ["senticompare", "--mpc", str(senti_files["mpc"]), "--swn", str(senti_files["swn"])],
    )
    assert captured.out.lstrip().startswith("{")


def test_bad_format_from_env_fails_cleanly(senti_files, capsys, monkeypatch):
    monkeypatch.setenv("LEXLOOP_FORMAT", "yaml")
    err = run_err(
        capsys,
        ["senticompare", "--mpc", str(senti_files["mpc"]), "--swn", str(senti_files["swn"])],
    )
    assert "unknown format" in err


def test_config_file_supplies_options(senti_files, tmp_path, capsys):
    cfg = write_lines(
        tmp_path / "opts.cfg",
        [
            "# defaults for the sentiment comparison",
            f"mpc = {senti_files['mpc']}",
            f"swn = {senti_files['swn']}",
            "format = records",
        ],
    )
    captured = run_ok(capsys, ["--config", str(cfg), "senticompare"])
    assert captured.out.lstrip().startswith("{")


def test_cli_flag_beats_config_file(senti_files, tmp_path, capsys):
    cfg = write_lines(tmp_path / "opts.cfg", ["format = records"])
    captured = run_ok(
        capsys,
        [
            "--config", str(cfg),
            "senticompare",
            "--mpc", str(senti_files["mpc"]),
            "--swn", str(senti_files["swn"]),
            "--format", "table",
        ],
    )
    assert captured.out.startswith("class")


def test_env_beats_config_file(senti_files, tmp_path, capsys, monkeypatch):
    cfg = write_lines(tmp_path / "opts.cfg", ["format = table"])
    monkeypatch.setenv("LEXLOOP_FORMAT", "records")
    captured = run_ok(
        capsys,
        [
            "--config", str(cfg),
            "senticompare",
            "--mpc", str(senti_files["mpc"]),
            "--swn", str(senti_files["swn"]),
        ],
    )
    assert captured.out.lstrip().startswith("{")


def test_missing_required_options_are_named(tmp_path, capsys):
    err = run_err(capsys, ["ingest", "--corpus", str(tmp_path / "x.txt")])
    assert "missing required option" in err
    assert "--lexicon" in err and "--out" in err


def test_bad_config_line_fails_cleanly(senti_files, tmp_path, capsys):
    cfg = write_lines(tmp_path / "opts.cfg", ["this has no equals sign"])
    err = run_err(
        capsys,
        [
            "--config", str(cfg),
            "senticompare",
            "--mpc", str(senti_files["mpc"]),
            "--swn", str(senti_files["swn"]),
        ],
    )
    assert "bad config line" in err
