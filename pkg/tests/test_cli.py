import json

import pytest

from arithx.cli import main
from arithx.experiments import ExperimentRecord, reproduces


def test_sol_json_output(capsys):
    assert main(["sol", "--group", "cyclic:5"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["schema"] == "arithx/1" and data["payload"]["sol_size"] == 25


def test_csv_output_to_file(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["ar-graph", "--group", "vec:2^4", "--k", "3", "--trials", "4",
                 "--format", "csv", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "command,seed,trial,k,lambda" and len(lines) == 5


def test_precondition_exit_code(capsys):
    assert main(["sol", "--group", "cyclic:6", "--q", "1,2,3"]) == 2
    assert "not a permutation" in capsys.readouterr().err
    assert main(["densecap", "--p", "3", "--n", "2"]) == 2
    assert main(["densecap", "--p", "3", "--n", "5", "--strict-n"]) == 2


def test_budget_exit_code():
    assert main(["densecap", "--p", "3", "--n", "5", "--budget", "1000"]) == 3


def test_invariant_exit_code(monkeypatch):
    import arithx.experiments as ex
    monkeypatch.setitem(ex.COMMANDS, "sol", (lambda params, seed: ({}, {"forced": False}),
                                             ex.COMMANDS["sol"][1]))
    assert main(["sol"]) == 1


def test_system_and_direction_files(tmp_path, capsys):
    system = tmp_path / "s.json"
    system.write_text('{"C": [[1, -2, 1]], "q": [1, 1, 1]}')
    assert main(["sol", "--group", "cyclic:7", "--system", str(system)]) == 0
    assert json.loads(capsys.readouterr().out)["payload"]["representatives"] == 7
    dirs = tmp_path / "d.json"
    dirs.write_text("[[1, 0, 0, 0, 0], [0, 1, 2, 0, 1]]")
    assert main(["densecap", "--directions", str(dirs)]) == 0
    rec = ExperimentRecord.from_json(json.loads(capsys.readouterr().out))
    assert rec.params["directions"] == [[1, 0, 0, 0, 0], [0, 1, 2, 0, 1]]
    assert reproduces(rec)


def test_norm_command_with_oracle(tmp_path, capsys):
    form = tmp_path / "f.json"
    form.write_text(json.dumps({"t": 3, "n": 2, "entries": [[[0, 0, 0], "1"], [[1, 1, 1], "1"]]}))
    assert main(["norm", str(form), "--p", "inf", "--oracle"]) == 0
    payload = json.loads(capsys.readouterr().out)["payload"]
    assert payload["estimate"]["value"] == pytest.approx(2.0)
    assert payload["oracle"]["kind"] == "exact"


def test_deviation_and_sparsify(capsys):
    assert main(["deviation", "--group", "cyclic:8", "--k", "4", "--trials", "3",
                 "--num-forms", "8", "--format", "csv"]) == 0
    assert capsys.readouterr().out.splitlines()[0].startswith("command,seed,k,n,t,p,mean")
    assert main(["deviation", "--mode", "matrix", "--group", "cyclic:11", "--k", "5",
                 "--trials", "3", "--eps-levels", "0.3,0.6"]) == 0
    capsys.readouterr()
    assert main(["sparsify", "--samples", "500", "--eta", "4"]) == 0
