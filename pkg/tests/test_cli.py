import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from pinchlab import __version__
from pinchlab.cli import main, parse_range, resolve_seed
from pinchlab.frames import DEFAULT_SEED

DATA = Path(__file__).resolve().parent.parent / "data"
FAST = str(DATA / "fast_search.json")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


class TestCommands:
    def test_invariants_cp2(self, capsys):
        d = run_json(capsys, "invariants", "--input", DATA / "cp2.json", "--config", FAST)
        s = d["summary"]
        assert abs(s["k_max"] - 4) < 1e-6 and s["scalar"] == pytest.approx(24)
        assert d["manifest"]["command"] == "invariants"

    def test_invariants_constant(self, capsys):
        d = run_json(capsys, "invariants", "--input", DATA / "sphere4.json", "--config", FAST)
        assert d["summary"]["r0"] == 1.0

    def test_symmetry_violation_exit(self, capsys):
        code, out, err = run(capsys, "invariants", "--input", DATA / "bad_symmetry.json")
        assert code == 1 and out == "" and "SymmetryViolation" in err and "bad_symmetry.json:5" in err

    @pytest.mark.parametrize("name, cone, expect", [
        ("cp2.json", "pic", "nonnegative_with_zero"),
        ("sphere4.json", "PIC2", "positive"),
        ("flat4.json", "pic", "nonnegative_with_zero"),
    ])
    def test_certify(self, capsys, name, cone, expect):
        d = run_json(capsys, "certify", "--input", DATA / name, "--cone", cone, "--config", FAST)
        assert d["certificate"]["verdict"] == expect
        if name == "sphere4.json":
            assert d["certificate"]["min_value"] == pytest.approx(1, abs=1e-8)
        if name == "flat4.json":
            assert d["certificate"]["min_value"] == 0

    def test_check_theorem_sub_r0(self, capsys):
        d = run_json(capsys, "check-theorem", "--id", "SUB_R0", "--input", DATA / "geodesic_sphere.json", "--config", FAST)
        assert d["report"]["holds"] is True and "pointwise_note" in d["report"]

    def test_check_theorem_verdict_not_exit_code(self, capsys):
        d = run_json(capsys, "check-theorem", "--id", "KMIN", "--input", DATA / "cp2.json", "--config", FAST)
        assert d["report"]["holds"] is False

    def test_check_theorem_wrong_input_kind(self, capsys):
        code, _, err = run(capsys, "check-theorem", "--id", "SUB_R0", "--input", DATA / "cp2.json")
        assert code == 1 and "immersion" in err
        code, _, err = run(capsys, "check-theorem", "--id", "KMAX", "--input", DATA / "geodesic_sphere.json")
        assert code == 1 and "intrinsic" in err

    def test_unknown_theorem(self, capsys):
        code, _, err = run(capsys, "check-theorem", "--id", "NOPE", "--input", DATA / "cp2.json")
        assert code == 1 and "unknown theorem" in err

    def test_verify_implication_input(self, capsys):
        d = run_json(capsys, "verify-implication", "--id", "KMAX_PIC", "--input", DATA / "cp2.json", "--config", FAST)
        assert d["inconsistent"] == 0 and d["nonvacuous"] == 0
        assert abs(d["reports"][0]["certificate"]["min_value"]) < 1e-6

    def test_verify_implication_immersion(self, capsys):
        d = run_json(capsys, "verify-implication", "--id", "SUB_KMAX_DIFF",
                     "--input", DATA / "round_sphere_in_flat.json", "--config", FAST)
        assert d["nonvacuous"] == 1 and d["inconsistent"] == 0

    def test_verify_implication_corpus(self, capsys):
        d = run_json(capsys, "verify-implication", "--id", "KMAX", "--corpus", DATA / "kmax_corpus.json", "--config", FAST)
        assert len(d["reports"]) == 10 and d["nonvacuous"] == 10 and d["inconsistent"] == 0
        assert str(DATA / "kmax_corpus.json") in d["manifest"]["inputs"]

    def test_bad_corpus(self, capsys, tmp_path):
        p = tmp_path / "c.json"
        p.write_text('{"n": 4}')
        code, _, err = run(capsys, "verify-implication", "--id", "KMAX", "--corpus", p)
        assert code == 1 and "count" in err

    def test_verify_identities(self, capsys):
        d = run_json(capsys, "verify-identities", "--trials", 20, "--dim", 4)
        assert d["all_passed"] and all(r["max_residual"] < 1e-9 for r in d["reports"])

    def test_thresholds(self, capsys):
        d = run_json(capsys, "thresholds", "--n", "4")
        kmin = next(r for r in d["rows"] if r["theorem"] == "KMIN")
        assert kmin["value"] == 0.5

    def test_thresholds_csv(self, capsys):
        code, out, _ = run(capsys, "thresholds", "--n", "4..5", "--format", "csv")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and len(rows) == 32  # COR4 starts at n = 6
        kmin = next(r for r in rows if r["theorem"] == "KMIN" and r["n"] == "4")
        assert kmin["value"] == "0.5" and kmin["N"] == ""
        assert float(next(r for r in rows if r["theorem"] == "SUB_KMAX_TOPO")["scale"]) == pytest.approx(40 / 3)

    def test_builders(self, capsys):
        d = run_json(capsys, "builders")
        assert {b["name"] for b in d["builders"]} >= {"fubini_study", "constant_curvature"}

    def test_out_file(self, capsys, tmp_path):
        p = tmp_path / "o.json"
        code, out, _ = run(capsys, "thresholds", "--n", "4", "--out", p)
        assert code == 0 and out == "" and json.loads(p.read_text())["rows"]

    def test_missing_input_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "invariants", "--input", tmp_path / "none.json")
        assert code == 1 and "cannot read" in err

    def test_bad_config(self, capsys, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text('{"restarts": 0}')
        code, _, err = run(capsys, "builders", "--config", p)
        assert code == 1 and "restarts" in err


class TestManifest:
    def test_contents(self, capsys):
        d = run_json(capsys, "certify", "--input", DATA / "sphere4.json", "--config", FAST)
        m = d["manifest"]
        assert m["version"] == __version__ and m["seed"] == DEFAULT_SEED
        assert m["config"]["restarts"] == 8 and len(m["inputs"]) == 2
        assert "wall_time" not in m

    def test_timing(self, capsys):
        d = run_json(capsys, "builders", "--timing")
        assert d["manifest"]["wall_time"] >= 0

    def test_seed_precedence(self, capsys, monkeypatch, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"seed": 11}')
        monkeypatch.delenv("PINCHLAB_SEED", raising=False)
        assert run_json(capsys, "builders")["manifest"]["seed"] == DEFAULT_SEED
        assert run_json(capsys, "builders", "--config", cfg)["manifest"]["seed"] == 11
        monkeypatch.setenv("PINCHLAB_SEED", "5")
        assert run_json(capsys, "builders", "--config", cfg)["manifest"]["seed"] == 5
        assert run_json(capsys, "builders", "--seed", 3)["manifest"]["seed"] == 3

    def test_bad_env_seed(self, capsys, monkeypatch):
        monkeypatch.setenv("PINCHLAB_SEED", "abc")
        code, _, err = run(capsys, "builders")
        assert code == 1 and "PINCHLAB_SEED" in err

    def test_resolve_seed(self, monkeypatch):
        monkeypatch.delenv("PINCHLAB_SEED", raising=False)
        assert resolve_seed(None) == DEFAULT_SEED and resolve_seed(4, 9) == 4 and resolve_seed(None, 9) == 9

    def test_seed_changes_search(self, capsys):
        a = run_json(capsys, "certify", "--input", DATA / "cp2.json", "--config", FAST, "--seed", 1)
        b = run_json(capsys, "certify", "--input", DATA / "cp2.json", "--config", FAST, "--seed", 2)
        assert a["certificate"]["frame"] != b["certificate"]["frame"]

    def test_threads_flag(self, capsys):
        d = run_json(capsys, "certify", "--input", DATA / "sphere4.json", "--config", FAST, "--threads", 1)
        assert d["certificate"]["verdict"] == "positive"


class TestParsing:
    def test_parse_range(self):
        assert parse_range("4..6") == [4, 5, 6] and parse_range("4,8") == [4, 8] and parse_range("5") == [5]

    @pytest.mark.parametrize("bad", ["6..4", "a", "4..x"])
    def test_parse_range_bad(self, bad):
        import argparse

        with pytest.raises(argparse.ArgumentTypeError):
            parse_range(bad)

    def test_usage_error(self, capsys):
        with pytest.raises(SystemExit) as ei:
            main(["certify"])
        assert ei.value.code == 2

    def test_module_entry_point(self):
        r = subprocess.run([sys.executable, "-m", "pinchlab", "thresholds", "--n", "4"],
                           capture_output=True, text=True, check=True)
        assert json.loads(r.stdout)["manifest"]["argv"] == ["thresholds", "--n", "4"]
