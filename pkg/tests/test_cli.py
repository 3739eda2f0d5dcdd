import csv
import io
import json

import pytest

from src.cli import main


@pytest.fixture(autouse=True)
def quiet_environment(monkeypatch):
    monkeypatch.setenv("CDST_LOG", "warning")
    for name in ("CDST_LOG_FORMAT", "CDST_EXACT_LIMIT", "CDST_LOWER_BOUND_LIMIT",
                 "CDST_TOLERANCE", "CDST_PORTS", "CDST_DEBUG"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def run(tmp_path, capsys):
    config = str(tmp_path / "absent-config.yml")

    def _run(*argv):
        code = main(["--config", config, *argv])
        return code, capsys.readouterr().out

    return _run


@pytest.fixture
def unit_path_file(tmp_path, run):
    path = str(tmp_path / "unit_path.json")
    code, _ = run("gen", "unit-path", "--output", path)
    assert code == 0
    return path


def solve_unit_path(run, tmp_path, unit_path_file, *extra):
    solution = str(tmp_path / "sol.json")
    report = str(tmp_path / "report.json")
    code, out = run("solve", "--input", unit_path_file, "--output", solution, "--report", report,
                    *extra)
    return code, out, solution, report


class TestSolveAndCheck:
    def test_solve_then_check(self, run, tmp_path, unit_path_file):
        code, out, solution, report = solve_unit_path(run, tmp_path, unit_path_file, "--mu", "1")
        assert code == 0
        summary = json.loads(out)
        assert summary["total"] == pytest.approx(8.0)
        assert summary["bounds_ok"] is True
        with open(report, encoding="utf-8") as handle:
            assert json.load(handle)["splitter"] == "improved"

        code, out = run("check", "--input", unit_path_file, "--solution", solution)
        assert code == 0
        result = json.loads(out)
        assert result["ok"] is True
        assert result["costs"]["total"] == pytest.approx(8.0)

    def test_baseline_splitter(self, run, tmp_path, unit_path_file):
        code, out, _, _ = solve_unit_path(run, tmp_path, unit_path_file, "--splitter", "baseline",
                                     "--mu", "1")
        assert code == 0
        assert json.loads(out)["total"] == pytest.approx(13.0)

    def test_tampered_cost(self, run, tmp_path, unit_path_file):
        _, _, solution, _ = solve_unit_path(run, tmp_path, unit_path_file)
        with open(solution, encoding="utf-8") as handle:
            data = json.load(handle)
        data["costs"]["total"] += 1.0
        with open(solution, "w", encoding="utf-8") as handle:
            json.dump(data, handle)
        code, _ = run("check", "--input", unit_path_file, "--solution", solution)
        assert code == 1

    def test_removed_edge(self, run, tmp_path, unit_path_file):
        _, _, solution, _ = solve_unit_path(run, tmp_path, unit_path_file)
        with open(solution, encoding="utf-8") as handle:
            data = json.load(handle)
        data["edges"] = data["edges"][1:]
        data.pop("costs", None)
        with open(solution, "w", encoding="utf-8") as handle:
            json.dump(data, handle)
        code, _ = run("check", "--input", unit_path_file, "--solution", solution)
        assert code == 1

    def test_malformed_instance(self, run, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{", encoding="utf-8")
        code, _ = run("solve", "--input", str(path), "--output", str(tmp_path / "sol.json"))
        assert code == 2

    def test_negative_mu(self, run, tmp_path, unit_path_file):
        code, _, _, _ = solve_unit_path(run, tmp_path, unit_path_file, "--mu", "-1")
        assert code == 2


class TestOtherCommands:
    def test_factors(self, run):
        code, out = run("factors")
        assert code == 0
        lines = out.splitlines()
        assert [line.split()[0] for line in lines] == ["beta", "improved", "baseline"]
        for value in ("1.70711", "2.04782", "2.15139", "2.61804", "2.38630"):
            assert value in out

    def test_factors_custom_beta(self, run):
        code, out = run("factors", "--beta", "1")
        assert code == 0
        assert out.splitlines()[1].split() == ["improved", "1.70711"]

    def test_oracle(self, run, tmp_path, unit_path_file):
        output = str(tmp_path / "opt.json")
        code, out = run("oracle", "--input", unit_path_file, "--output", output)
        assert code == 0
        assert json.loads(out)["optimum"] == pytest.approx(8.0)

    def test_gen_to_stdout(self, run):
        code, out = run("gen", "gap", "--k", "2")
        assert code == 0
        data = json.loads(out)
        assert data["name"] == "gap-k2"
        assert data["metric"]["type"] == "graph"

        code, out = run("gen", "random", "--n", "5", "--seed", "3", "--family", "star-heavy")
        assert code == 0
        assert json.loads(out)["name"] == "star-heavy-n5-s3"

    def test_bench_gap(self, run):
        code, out = run("bench", "--gap", "3", "--gap-solve-limit", "1")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert [(r["instance"], r["beta_method"]) for r in rows] == [
            ("gap-k1", "formula"), ("gap-k1", "mst"), ("gap-k2", "formula"),
            ("gap-k3", "formula")]

    def test_bench_bad_sizes(self, run):
        code, _ = run("bench", "--scaling", "--sizes", "ten")
        assert code == 2


class TestConfiguration:
    def test_invalid_log_level(self, monkeypatch, capsys):
        monkeypatch.setenv("CDST_LOG", "bogus")
        code = main(["factors"])
        assert code == 2
        assert "Configuration error" in capsys.readouterr().err

    def test_invalid_number(self, monkeypatch, capsys):
        monkeypatch.setenv("CDST_EXACT_LIMIT", "lots")
        assert main(["factors"]) == 2

    def test_yaml_ports(self, tmp_path, unit_path_file, capsys):
        config = tmp_path / "config.yml"
        config.write_text("solver:\n  ports: any\n", encoding="utf-8")
        code = main(["--config", str(config), "solve", "--input", unit_path_file, "--mu", "1",
                     "--output", str(tmp_path / "sol.json")])
        assert code == 0
        assert json.loads(capsys.readouterr().out)["total"] <= 8.0 + 1e-9
