import json
import subprocess
import sys
from pathlib import Path

import pytest

from entcurv.cli import main

ROOT = Path(__file__).resolve().parents[1]


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_wasserstein(tmp_path, capsys):
    f = tmp_path / "d.json"
    f.write_text(json.dumps([[0, 1], [1, 0]]))
    code, out, _ = run(["wasserstein", str(f), "1/2,1/2", "4/5,1/5"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["w1"] == "3/10" and doc["winf"] == 1
    code, out, _ = run(["wasserstein", str(f), "0.5,0.5", "0.8,0.2", "--float", "--plans"], capsys)
    assert code == 0 and json.loads(out)["w1_float"] == pytest.approx(0.3)


def test_certify_product(capsys):
    code, out, _ = run(["certify", "--model", "product", "--n", "3", "--blocks", "singletons", "--spectral"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    assert doc["results"]["certify"]["kappa"] == "1/3"
    assert doc["results"]["spectral"]["spectral_factor"] == pytest.approx(2 / 3)


def test_certify_permutations(capsys):
    code, out, _ = run(["certify", "--model", "permutations", "--n", "4", "--blocks", "pairs"], capsys)
    assert code == 0 and json.loads(out)["results"]["certify"]["kappa"] == "1/6"


def test_gff_lattice(capsys):
    code, out, _ = run(["gff", "--lattice", "3", "--hop", "0.5", "--samples", "200"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["results"]["gff"]["delta_min"] == pytest.approx(0.2928932188134524, abs=1e-12)


def test_sphere_and_csv(tmp_path, capsys):
    csv = tmp_path / "r.csv"
    code, out, _ = run(["sphere", "--n", "3", "--p", "2", "--blocks", "pairs", "--pairs", "500", "--csv", str(csv)],
                       capsys)
    assert code == 0 and json.loads(out)["passed"]
    assert csv.read_text().startswith("kind,ratio\n")


def test_langevin(capsys):
    code, out, _ = run(["langevin", "--T", "2"], capsys)
    assert code == 0
    assert json.loads(out)["results"]["langevin"]["fitted_rate"] == pytest.approx(1.0, abs=0.01)


def test_usage_errors(tmp_path, capsys):
    code, _, err = run(["certify", "--model", "product", "--n", "3", "--blocks", "triples"], capsys)
    assert code == 2 and "model.blocks" in err
    bad = tmp_path / "c.toml"
    bad.write_text('tasks = ["certify"]\n')
    code, _, err = run(["run", str(bad)], capsys)
    assert code == 2 and "config.model" in err
    bad.write_text('tasks = ["langevin"]\n[model]\nkind = "product"\nn = 2\nblocks = "singletons"\n')
    code, _, err = run(["run", str(bad)], capsys)
    assert code == 2 and "config.tasks" in err
    code, _, _ = run(["run", str(tmp_path / "missing.toml")], capsys)
    assert code == 2
    with pytest.raises(SystemExit) as exc:
        main(["certify"])
    assert exc.value.code == 2


def test_assertion_failure_exit_code(capsys):
    code, out, err = run(["duality", "--model", "product", "--n", "2", "--blocks", "singletons",
                          "--kappa", "0.99", "--trials", "300"], capsys)
    assert code == 1 and not json.loads(out)["passed"]


def test_run_config_deterministic(tmp_path):
    outs = []
    for i in range(2):
        o = tmp_path / f"r{i}.json"
        code = main(["run", str(ROOT / "configs" / "product3.toml"), "--output", str(o)])
        assert code == 0
        outs.append(o.read_bytes())
        assert (tmp_path / f"r{i}.json.timing.json").exists()
    assert outs[0] == outs[1]


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "entcurv.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "wasserstein" in r.stdout
