import json
import shutil
import subprocess
import sys

import pytest

from horngraphs.cli import main
from horngraphs.graphs import read_json
from horngraphs.normalize import read_copy_map

from conftest import DATA


@pytest.fixture
def example(tmp_path):
    p = tmp_path / "example.chc"
    shutil.copy(DATA / "running_example.chc", p)
    return p


def test_parse(example, capsys):
    assert main(["parse", str(example)]) == 0
    assert capsys.readouterr().out.startswith("L(x,y,n) :- n >= 0")


def test_normalize_writes_sidecar(example):
    assert main(["normalize", str(example)]) == 0
    out = example.with_name("example.normalized.chc").read_text()
    assert "L'(x',y',n') :- L(x,y,n), x' = x, y' = y, n' = n." in out
    assert read_copy_map(example.with_name("example.copies.tsv").read_text()) == {"L'": "L"}


@pytest.mark.parametrize("kind", ["cg", "cdhg", "pruned"])
def test_graph_file_names(example, kind):
    assert main(["graph", "--kind", kind, str(example)]) == 0
    assert example.with_name(f"example.{kind}.gv").read_text().startswith("digraph")
    g, _ = read_json(example.with_name(f"example.{kind}.json").read_text())
    assert g.kind == kind.upper()


def test_label_merges_tasks(example):
    for task in ["1", "2", "3", "4a", "4b"]:
        assert main(["label", "--task", task, "--graph", "cdhg", str(example)]) == 0
    doc = json.loads(example.with_name("example.cdhg.json").read_text())
    assert list(doc["labels"]) == ["T1", "T2", "T3", "T4a", "T4b"]
    g, bundles = read_json(json.dumps(doc))
    t2 = next(b for b in bundles if b.task == "T2")
    assert t2.values[g.node_of("rs", "L")] == 4


def test_label_exit_codes(example, tmp_path):
    # satisfiable: no counterexample, so the clause-set labels are undefined
    assert main(["label", "--task", "5a", "--graph", "cg", str(example)]) == 2
    assert main(["label", "--task", "5b", "--graph", "cg", "--depth", "60", "--timeout-ms", "1",
                 str(example)]) == 3
    bad = tmp_path / "bad.chc"
    bad.write_text("P(x :- x.")
    assert main(["parse", str(bad)]) == 2
    assert main(["parse", str(tmp_path / "missing.chc")]) == 2


def test_usage_errors(example, capsys):
    with pytest.raises(SystemExit) as e:
        main(["graph", "--bogus", str(example)])
    assert e.value.code == 1
    assert "usage:" in capsys.readouterr().err
    with pytest.raises(SystemExit) as e:
        main(["label", "--task", "9", "--graph", "cg", str(example)])
    assert e.value.code == 1


def test_outputs_are_byte_identical(example, tmp_path):
    texts = []
    for d in ("a", "b"):
        assert main(["graph", "--kind", "cdhg", "--out-dir", str(tmp_path / d), str(example)]) == 0
        texts.append((tmp_path / d / "example.cdhg.json").read_bytes())
    assert texts[0] == texts[1]


def test_gen_train_eval_pipeline(tmp_path):
    data = tmp_path / "corpus"
    assert main(["gen-dataset", "--count", "20", "--seed", "3", "--out", str(data)]) == 0
    manifest = json.loads((data / "splits.json").read_text())
    assert list(map(len, (manifest["train"], manifest["valid"], manifest["test"]))) == [12, 4, 4]
    meta = json.loads((data / "0000.meta.json").read_text())
    assert {"template", "params", "planted_unsat", "known_depth", "bound_facts"} <= set(meta)
    model, metrics = tmp_path / "m.npz", tmp_path / "metrics.json"
    assert main(["train", "--data", str(data), "--graph", "cg", "--task", "1", "--epochs", "2",
                 "--hidden", "8", "--steps", "2", "--model", str(model),
                 "--metrics", str(metrics)]) == 0
    met = json.loads(metrics.read_text())
    assert list(met) == ["task", "accuracy", "mse", "confusion", "dom", "epochs_run"]
    assert met["task"] == "T1" and met["epochs_run"] == 2
    out = tmp_path / "eval.json"
    assert main(["eval", "--data", str(data), "--model", str(model), "--metrics", str(out)]) == 0
    assert json.loads(out.read_text())["confusion"] == met["confusion"]


def test_gradcheck_command(capsys):
    assert main(["gradcheck"]) == 0
    assert "max relative error" in capsys.readouterr().out


def test_module_entry_point(example):
    r = subprocess.run([sys.executable, "-m", "horngraphs", "parse", str(example)],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.count("\n") == 3
    r = subprocess.run([sys.executable, "-m", "horngraphs"], capture_output=True, text=True)
    assert r.returncode == 1
