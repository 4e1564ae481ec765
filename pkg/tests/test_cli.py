import csv
import io
import json

import pytest

from relbc.cli import main

FAST = {
    "verify-povm": [],
    "security-table": ["--n-max", "4", "--azuma", "100:0.05"],
    "azuma-table": ["--trials", "500", "--n-values", "50", "--eps-values", "0.05"],
    "honest-run": ["--n", "40"],
    "cheat-run": ["--trials", "2000", "--n", "2"],
    "loss-check": ["--trials", "2000", "--loss", "0.5", "--n", "10"],
    "collective-check": [],
    "lemma2-demo": ["--trials", "100", "--n", "1"],
}


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv, "--format", "json")
    return code, json.loads(out)


def rows(report):
    return {r["quantity"]: r for r in report["rows"]}


class TestCommands:
    def test_verify_povm(self, capsys):
        code, rep = run_json(capsys, "verify-povm")
        assert code == 0
        r = rows(rep)
        assert r["gamma_diagonal"]["value"] == pytest.approx(0.21338835, abs=1e-8)
        assert r["win_probability"]["value"] == pytest.approx(0.8535533906, abs=1e-10)

    def test_perturbed_fails(self, capsys):
        code, _ = run(capsys, "verify-povm", "--perturb", "0.1")
        assert code == 1

    def test_text_and_json_agree(self, capsys):
        _, rep = run_json(capsys, "verify-povm")
        _, text = run(capsys, "verify-povm")
        line = next(ln for ln in text.splitlines() if ln.startswith("win_probability"))
        assert float(line.split()[1]) == pytest.approx(rows(rep)["win_probability"]["value"], abs=1e-9)

    @pytest.mark.parametrize("n_max", [1, 10])
    def test_security_table(self, capsys, n_max):
        code, rep = run_json(capsys, "security-table", "--n-max", str(n_max))
        assert code == 0
        values = [r["value"] for r in rep["rows"] if r["quantity"].startswith("security_bound")]
        assert len(values) == n_max
        assert all(b < a for a, b in zip(values, values[1:]))
        assert rows(rep)["noise_threshold"]["value"] == pytest.approx(0.1464466094, abs=1e-9)

    def test_honest_run(self, capsys):
        code, rep = run_json(capsys, "honest-run", "--n", "100")
        assert code == 0 and rows(rep)["verdict"]["value"] == "Accept"

    def test_honest_text_has_transcript(self, capsys):
        _, text = run(capsys, "honest-run", "--n", "10")
        assert "alice@P -> alice@Q0" in text and text.rstrip().endswith("verdict=Accept")

    def test_collective(self, capsys):
        assert run(capsys, "collective-check")[0] == 0
        assert run(capsys, "collective-check", "--corrupt")[0] == 1

    def test_cheat_run(self, capsys):
        code, rep = run_json(capsys, "cheat-run", "--strategy", "uniform", "--trials", "5000")
        assert code == 0
        assert rows(rep)["cheat_probability"]["value"] == pytest.approx(0.5, abs=0.03)

    def test_csv(self, capsys):
        code, out = run(capsys, "security-table", "--n-max", "2", "--format", "csv")
        assert code == 0
        table = list(csv.DictReader(io.StringIO(out)))
        assert table[0]["quantity"] == "mu"

    def test_output_file(self, capsys, tmp_path):
        path = tmp_path / "r.json"
        assert main(["verify-povm", "--format", "json", "--output", str(path)]) == 0
        assert json.loads(path.read_text())["command"] == "verify-povm"


class TestUsage:
    def test_bad_strategy(self, capsys):
        assert main(["cheat-run", "--strategy", "psychic"]) == 2

    def test_bad_trials(self, capsys):
        assert main(["cheat-run", "--trials", "10"]) == 2

    def test_unknown_command(self, capsys):
        assert main(["teleport-everything"]) == 2
        assert main(["verify-povm", "--help"]) == 0

    def test_json_config(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"n": 12, "bit": 1}))
        code, rep = run_json(capsys, "honest-run", "--config", str(cfg))
        assert code == 0 and rep["parameters"]["n"] == 12 and rep["parameters"]["bit"] == 1

    def test_command_line_beats_config(self, capsys, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("n = 12\n# comment\nbit = 1\n")
        _, rep = run_json(capsys, "honest-run", "--config", str(cfg), "--n", "30")
        assert rep["parameters"]["n"] == 30 and rep["parameters"]["bit"] == 1

    def test_bad_config(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"warp_factor": 9}))
        assert main(["honest-run", "--config", str(cfg)]) == 2
        assert main(["honest-run", "--config", str(tmp_path / "missing.json")]) == 2


@pytest.mark.parametrize("command", sorted(FAST))
def test_repeat_is_byte_identical(capsys, command):
    argv = [command, *FAST[command], "--seed", "77", "--format", "json"]
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second
