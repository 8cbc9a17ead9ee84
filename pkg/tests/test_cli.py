import json

import pytest

from tweetmine.cli import main
from tweetmine.ingest import write_records
from tweetmine.synth import two_topic_corpus


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    sc = two_topic_corpus(300, 300, seed=6)
    write_records(root / "stream.ndjson", sc.records)
    assert main(["ingest", "--in", str(root / "stream.ndjson"), "--out", str(root / "corpus")]) == 0
    assert main(["prep", "--in", str(root / "corpus"), "--out", str(root / "tokens")]) == 0
    return root


def read(p):
    return p.read_bytes()


def test_ingest_and_prep_outputs(workdir):
    stats = json.loads((workdir / "corpus" / "stats.json").read_text())
    assert stats["topic"]["n_total"] == 300 and stats["control"]["n_total"] == 300
    assert (workdir / "tokens" / "topic.tok").exists() and (workdir / "tokens" / "control.tok").exists()


def test_classify_and_report_replay(workdir, tmp_path):
    out = tmp_path / "cls"
    assert main(["classify", "--in", str(workdir / "tokens"), "--out", str(out), "--seed", "3", "--schemes", "count"]) == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["seed"] == 3 and man["config"]["schemes"] == ["count"]
    assert set(man["inputs"]) == {"topic_tokens", "control_tokens"}
    again = tmp_path / "replay"
    assert main(["report", "--manifest", str(out / "manifest.json"), "--out", str(again)]) == 0
    for name in ("classification.csv", "manifest.json"):
        assert read(out / name) == read(again / name)


def test_config_file_and_override(workdir, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("seed = 11\nschemes = binary\nclassifiers = nb\n")
    out = tmp_path / "cfg"
    assert main(["classify", "--in", str(workdir / "tokens"), "--out", str(out), "--config", str(cfg), "--seed", "12"]) == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["seed"] == 12 and man["config"]["classifiers"] == ["nb"]
    assert "nb,binary,control" in (out / "classification.csv").read_text()


def test_train_then_evaluate(workdir, tmp_path):
    model = tmp_path / "model"
    assert main(["train", "--in", str(workdir / "tokens"), "--out", str(model), "--classifier", "logreg"]) == 0
    assert (model / "model.json").exists() and (model / "vocab.txt").exists()
    ev = tmp_path / "ev"
    assert main(["evaluate", "--model", str(model), "--out", str(ev)]) == 0
    rows = (ev / "confusion.csv").read_text().splitlines()
    assert rows[1].startswith("control,") and rows[2].startswith("topic,")


def test_descriptive_commands(workdir, tmp_path):
    tok = str(workdir / "tokens")
    assert main(["zipf", "--in", tok, "--out", str(tmp_path / "z")]) == 0
    assert (tmp_path / "z" / "zipf_fit.csv").exists()
    assert main(["lengths", "--in", tok, "--out", str(tmp_path / "l")]) == 0
    assert main(["freq", "--in", tok, "--out", str(tmp_path / "f"), "--top", "10"]) == 0
    assert main(["hashtags", "--in", str(workdir / "corpus"), "--out", str(tmp_path / "h")]) == 0
    assert main(["vocab", "--in", tok, "--out", str(tmp_path / "v"), "--size", "50"]) == 0
    assert len((tmp_path / "v" / "vocab.txt").read_text().split()) == 50


def test_pos_stats(tmp_path):
    a = tmp_path / "a.tsv"
    b = tmp_path / "b.tsv"
    a.write_text("1\tdog\tN\n1\truns\tV\n\n2\tcat\tN\n2\tsleeps\tV\n2\tsun\tN\n\n")
    b.write_text("3\tgo\tV\n3\tnow\tR\n\n4\trun\tV\n4\tfast\tR\n4\tcar\tN\n\n")
    assert main(["pos-stats", "--topic", str(a), "--control", str(b), "--tags", "N,V", "--out", str(tmp_path / "p")]) == 0
    assert list((tmp_path / "p").iterdir())


def test_lasso_and_loko(workdir, tmp_path):
    assert main(["lasso-sweep", "--in", str(workdir / "tokens"), "--out", str(tmp_path / "s"), "--lambdas", "1e-3,1e-2"]) == 0
    assert len((tmp_path / "s" / "lasso_sweep.csv").read_text().splitlines()) == 3
    assert main(["loko", "--corpus", str(workdir / "corpus"), "--in", str(workdir / "tokens"), "--out", str(tmp_path / "k")]) == 0
    rows = (tmp_path / "k" / "loko.csv").read_text().splitlines()
    assert len(rows) == 1 + 1 + 4


def test_confound_prints(capsys, tmp_path):
    assert main(["confound", "--p-m", "0.9", "--p-n", "0.9", "--rho-m", "0.1", "--out", str(tmp_path / "c")]) == 0
    assert "0.82" in capsys.readouterr().out
    assert (tmp_path / "c" / "confound.csv").read_text().splitlines()[1].startswith("0.9,0.9,0.1,0.82,")


@pytest.mark.parametrize(
    "argv",
    [
        ["confound", "--p-m", "1.5", "--p-n", "0.9", "--rho-m", "0.1"],
        ["classify", "--in", "TOKENS", "--fraction", "1.0", "--out", "OUT"],
        ["classify", "--in", "TOKENS", "--policy", "bogus", "--out", "OUT"],
        ["classify", "--in", "TOKENS"],
    ],
)
def test_config_errors_exit_2(argv, workdir, tmp_path, capsys):
    argv = [str(workdir / "tokens") if a == "TOKENS" else str(tmp_path / "o") if a == "OUT" else a for a in argv]
    assert main(argv) == 2


def test_data_errors_exit_3(workdir, tmp_path):
    assert main(["prep", "--in", str(tmp_path / "missing"), "--out", str(tmp_path / "o")]) == 3
    bad = tmp_path / "bad.ndjson"
    bad.write_text('{"id": "1", "text": "hi", "created_at": "2013-08-26T00:00:00Z", "lang": "en"}\n{oops\n')
    assert main(["ingest", "--in", str(bad), "--out", str(tmp_path / "c")]) == 3


def test_report_detects_changed_input(workdir, tmp_path):
    tok = tmp_path / "tok"
    tok.mkdir()
    for name in ("topic.tok", "control.tok"):
        (tok / name).write_bytes((workdir / "tokens" / name).read_bytes())
    out = tmp_path / "run"
    assert main(["classify", "--in", str(tok), "--out", str(out), "--schemes", "binary", "--classifiers", "nb"]) == 0
    with open(tok / "topic.tok", "a") as fh:
        fh.write("extra\tword\n")
    assert main(["report", "--manifest", str(out / "manifest.json"), "--out", str(tmp_path / "r")]) == 3
