import json
import subprocess
import sys

import pytest

from grover_entanglement import __version__, cli


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


class TestTrace:
    def test_csv_to_stdout(self, capsys):
        code, out, err = run(["trace", "--n", "3", "--marked", "0"], capsys)
        assert code == 0
        lines = out.strip().splitlines()
        assert len(lines) == 7 and lines[0].startswith("step_index,label")
        assert "final_success=0.9453125" in err and "R=2" in err

    def test_bitstrings_and_json(self, capsys, tmp_path):
        out_file = tmp_path / "t.json"
        code, out, _ = run(["trace", "--n", "4", "--marked", "0000,0001,0010,0011", "--format", "json",
                            "--out", str(out_file)], capsys)
        assert code == 0 and "final_delta=4 final_chi=1" in out
        obj = json.loads(out_file.read_text())
        assert obj["header"]["final_cos_zero"] is True
        assert obj["steps"][-1]["success_probability"] == pytest.approx(1.0, abs=1e-12)

    def test_oracle_file(self, capsys, tmp_path):
        f = tmp_path / "oracle.txt"
        f.write_text("# two solutions\n101\n3\n")
        code, out, err = run(["trace", "--n", "3", "--oracle-file", str(f)], capsys)
        assert code == 0 and "M=2" in err

    @pytest.mark.parametrize(
        "argv",
        [
            ["trace", "--n", "3", "--marked", "9"],
            ["trace", "--n", "3", "--marked", "1,1"],
            ["trace", "--n", "3", "--marked", "0,1,2,3"],
            ["trace", "--n", "0", "--marked", "0"],
            ["trace", "--n", "3", "--oracle-file", "/nonexistent/file"],
        ],
    )
    def test_input_errors_exit_2(self, argv, capsys):
        code, _, err = run(argv, capsys)
        assert code == 2 and "error" in err

    def test_max_n(self, capsys):
        code, _, err = run(["trace", "--n", "6", "--marked", "1", "--max-n", "5"], capsys)
        assert code == 2 and "cap" in err


class TestAnalyze:
    def test_report(self, capsys, tmp_path):
        f = tmp_path / "bell.json"
        f.write_text(json.dumps({"n": 2, "amplitudes": [0.7071067811865476, 0, 0, 0.7071067811865476]}))
        code, out, _ = run(["analyze", "--state", str(f)], capsys)
        rep = json.loads(out)
        assert code == 0 and (rep["delta"], rep["chi"], rep["e_chi"]) == (1, 2, 1.0)

    def test_product_factors(self, capsys, tmp_path):
        f = tmp_path / "p.json"
        f.write_text(json.dumps({"n": 2, "amplitudes": [0.6, 0.8, 0, 0]}))
        code, out, _ = run(["analyze", "--state", str(f)], capsys)
        rep = json.loads(out)
        assert rep["delta"] == 2
        assert rep["factors"][0] == {"qubits": [0], "amplitudes": [1.0, 0.0]}
        assert rep["factors"][1]["amplitudes"] == pytest.approx([0.6, 0.8])

    def test_ambiguous_exit_3(self, capsys, tmp_path):
        f = tmp_path / "near.json"
        eps = 1e-9
        f.write_text(json.dumps({"n": 2, "amplitudes": [1.0, 0, 0, eps]}))
        code, out, _ = run(["analyze", "--state", str(f)], capsys)
        assert code == 3 and json.loads(out)["ambiguous"] is True

    @pytest.mark.parametrize("content", ["{", '{"n": 2, "amplitudes": [1, 1, 1, 1]}', '{"n": 2}'])
    def test_bad_state_exit_2(self, content, capsys, tmp_path):
        f = tmp_path / "bad.json"
        f.write_text(content)
        assert run(["analyze", "--state", str(f)], capsys)[0] == 2


class TestVerify:
    def test_thm9(self, capsys, tmp_path):
        out_file = tmp_path / "v.json"
        code, out, _ = run(["verify", "--check", "thm9", "--n", "4", "--m", "3", "--exhaustive",
                            "--out", str(out_file)], capsys)
        assert code == 0 and "560 instances" in out
        assert json.loads(out_file.read_text())["verdict"] == "pass"

    def test_lemma2_count_summary(self, capsys):
        code, _, err = run(["verify", "--check", "lemma2_count", "--n", "3", "--m", "2"], capsys)
        assert code == 0 and "brute 12 vs formula 12" in err

    def test_fraction(self, capsys):
        code, _, err = run(["verify", "--check", "fraction", "--n", "4", "--m", "2"], capsys)
        assert code == 0 and "strictly decreasing: True" in err

    def test_violation_exit_1(self, capsys):
        code, out, _ = run(["verify", "--check", "thm9", "--n", "4", "--m", "3", "--tol", "0.4"], capsys)
        assert code == 1 and json.loads(out)["verdict"] == "fail"

    @pytest.mark.parametrize(
        "argv",
        [
            ["verify", "--check", "thm99", "--n", "3"],
            ["verify", "--check", "thm9", "--n", "3", "--m", "2"],
            ["verify", "--check", "thm3", "--n", "6", "--exhaustive"],
            ["verify", "--check", "thm9", "--n", "3", "--exhaustive", "--samples", "5"],
            ["verify", "--check", "thm9", "--n", "3", "--samples", "0"],
            ["verify", "--check", "fraction", "--n", "4"],
        ],
    )
    def test_usage_errors(self, argv, capsys):
        assert run(argv, capsys)[0] == 2

    def test_sampled_default_above_four(self, capsys):
        code, out, _ = run(["verify", "--check", "thm11", "--n", "5", "--seed", "1"], capsys)
        res = json.loads(out)
        assert code == 0 and res["mode"] == "sampled" and res["instances_tested"] == 100


class TestSweep:
    def test_csv(self, capsys):
        code, out, err = run(["sweep", "--n", "4", "--m-range", "1..7"], capsys)
        assert code == 0
        assert "0 nonconforming" in err and "out-of-table" in err
        assert out.splitlines()[0].startswith("n,M,marked,row")

    @pytest.mark.parametrize("rng", ["4..4", "5..2", "a..b"])
    def test_bad_range(self, rng, capsys):
        assert run(["sweep", "--n", "3", "--m-range", rng], capsys)[0] == 2

    def test_json(self, capsys):
        code, out, _ = run(["sweep", "--n", "5", "--m-range", "3", "--samples", "4", "--format", "json"], capsys)
        rows = json.loads(out)
        assert code == 0 and len(rows) == 4 and all(r["M"] == 3 for r in rows)


def test_jobs_must_be_positive(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["sweep", "--n", "3", "--m-range", "1", "--jobs", "0"])
    assert exc.value.code == 2


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "grover_entanglement.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout
