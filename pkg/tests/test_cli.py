import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from prodiso import cli

DATA = Path(__file__).resolve().parent.parent / "data"


def run(capsys, *argv):
    code = cli.dispatch([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def report(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def without_timing(text):
    doc = json.loads(text)
    doc.pop("timing", None)
    return doc


class TestSubcommands:
    def test_validate(self, capsys):
        code, rep = report(capsys, "validate", DATA / "p3.json", DATA / "p3xp3.json")
        assert code == cli.EXIT_OK
        assert [r["valid"] for r in rep["results"]] == [True, True]
        assert rep["command"][0] == "validate"
        assert len(rep["inputs_digest"]) == 64

    def test_decompose_p3_squared(self, capsys):
        p3 = DATA / "p3.json"
        code, rep = report(capsys, "decompose", "--products", p3, p3, "--all")
        assert code == cli.EXIT_OK
        assert rep["summary"]["certificates"] == 8 and rep["summary"]["reducible"] == 8

    def test_decompose_two_point_square(self, capsys):
        code, rep = report(capsys, "decompose", "--products", DATA / "two_point_sq.json", "--all")
        assert code == cli.EXIT_IRREDUCIBLE
        assert rep["summary"]["irreducible"] == 16 and rep["summary"]["reducible"] == 8

    def test_decompose_map_file(self, capsys, tmp_path):
        prod = DATA / "p3xp3.json"
        pairs = [[[str(a), str(b)], [str(b), str(a)]] for a in range(3) for b in range(3)]
        (tmp_path / "swap.json").write_text(json.dumps({"map": pairs}))
        code, rep = report(capsys, "decompose", "--products", prod, "--map", tmp_path / "swap.json")
        assert code == cli.EXIT_OK
        assert rep["results"][0]["perm"] == [1, 0]

    def test_decompose_hypothesis_violation(self, capsys, tmp_path):
        one = {"name": "pt", "points": ["0"], "distances": [[0]]}
        (tmp_path / "pt.json").write_text(json.dumps(one))
        code, rep = report(
            capsys, "decompose", "--products", tmp_path / "pt.json", DATA / "p3.json", "--all"
        )
        assert code == cli.EXIT_HYPOTHESIS

    def test_isometries(self, capsys):
        code, rep = report(capsys, "isometries", DATA / "p3xp3.json")
        assert code == cli.EXIT_OK
        assert rep["results"]["count"] == 8 and rep["summary"]["group"] is True

    def test_product_and_factorize(self, capsys):
        code, rep = report(capsys, "product", DATA / "p5.json", DATA / "p3.json", "--flatten")
        assert code == cli.EXIT_OK and rep["summary"]["points"] == 15
        code, rep = report(capsys, "product", "--factorize", DATA / "grid5x3.json")
        assert code == cli.EXIT_OK and rep["summary"]["factorizations"] == 1
        code, rep = report(capsys, "product", "--factorize", DATA / "p5.json")
        assert rep["summary"]["factorizations"] == 0

    def test_quad(self, capsys):
        code, rep = report(capsys, "quad", "--dim", 3, "--scale", 1)
        assert code == cli.EXIT_OK
        graph = rep["results"]["graph"]
        assert len(graph["vertices"]) == 14 and len(graph["edges"]) == 24
        code, rep = report(capsys, "quad", "--embed", DATA / "p5xp5.json")
        assert rep["summary"] == {"admissible": True, "standard": True}
        code, rep = report(capsys, "quad", "--max-dim", DATA / "p5xp5.json")
        assert rep["summary"]["max_quad_dimension"] == 2

    def test_text_format(self, capsys):
        code, out, _ = run(capsys, "quad", "--dim", 3, "--format", "text")
        assert code == cli.EXIT_OK
        assert "vertices: 14" in out and "edges: 24" in out

    def test_verify_smoke(self, capsys):
        code, rep = report(capsys, "verify", "--suite", "smoke")
        assert code == cli.EXIT_OK and rep["results"]["passed"] is True

    def test_output_file(self, capsys, tmp_path):
        dest = tmp_path / "rep.json"
        code, out, _ = run(capsys, "validate", DATA / "p3.json", "--output", dest)
        assert code == cli.EXIT_OK and out == ""
        assert json.loads(dest.read_text())["summary"]["valid"] == 1


class TestErrors:
    def test_parse_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"points": ["a", "b"], "distances": [[0, "3/0"], ["3/0", 0]]}')
        code, out, err = run(capsys, "validate", bad)
        assert code == cli.EXIT_INPUT and out == ""
        assert "line 1" in err

    def test_axiom_violation(self, capsys, tmp_path):
        bad = tmp_path / "asym.json"
        bad.write_text('{"points": ["a", "b"], "distances": [[0, 1], [2, 0]]}')
        code, _, err = run(capsys, "validate", bad)
        assert code == cli.EXIT_INPUT and "asymmetry" in err

    @pytest.mark.parametrize(
        "argv",
        [[], ["bogus"], ["validate"], ["validate", "--bogus", "x"], ["quad", "--format", "xml"],
         ["decompose", "--products", "a.json"]],
    )
    def test_usage(self, capsys, argv):
        code, _, _ = run(capsys, *argv)
        assert code == cli.EXIT_USAGE

    def test_budget(self, capsys, monkeypatch):
        monkeypatch.setenv("PRODISO_NODE_CAP", "5")
        code, _, err = run(capsys, "isometries", DATA / "p5xp5.json")
        assert code == cli.EXIT_BUDGET and "node cap 5" in err

    def test_exit_codes_distinct(self):
        codes = [cli.EXIT_OK, cli.EXIT_INPUT, cli.EXIT_IRREDUCIBLE, cli.EXIT_HYPOTHESIS,
                 cli.EXIT_BUDGET, cli.EXIT_VERIFY, cli.EXIT_USAGE]
        assert len(set(codes)) == len(codes)


class TestDeterminism:
    @pytest.mark.parametrize(
        "argv",
        [
            ["decompose", "--products", DATA / "two_point_sq.json", "--all"],
            ["isometries", DATA / "p3xp3.json"],
            ["quad", "--embed", DATA / "p5xp5.json"],
        ],
    )
    def test_identical_reports(self, capsys, argv):
        _, first, _ = run(capsys, *argv)
        _, second, _ = run(capsys, *argv)
        assert without_timing(first) == without_timing(second)
        # byte-identical apart from the timing line
        assert [l for l in first.splitlines() if '"seconds"' not in l] == [
            l for l in second.splitlines() if '"seconds"' not in l
        ]

    def test_entry_point(self):
        exe = shutil.which("prodiso")
        argv = [exe] if exe else [sys.executable, "-m", "prodiso.cli"]
        proc = subprocess.run(
            argv + ["quad", "--dim", "2"], capture_output=True, text=True, check=False
        )
        assert proc.returncode == 0
        assert len(json.loads(proc.stdout)["results"]["graph"]["edges"]) == 8
