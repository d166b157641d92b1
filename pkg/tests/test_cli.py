import json
import subprocess
import sys

import pytest

from seqnet.cli import main
from seqnet.witness import WitnessResult, verify_witness

FIRST = ["-m", "6", "-n", "5", "--rates", "2,1,6,7,1", "--rn2", "5", "--eps", "0.006"]
SECOND = ["-m", "6", "-n", "5", "--rates", "3,6,6,18,2", "--rn2", "5", "--eps", "0.06"]
SECOND_FULL = "3,6,6,18,2,0.06,5,0.06,0.06,0.06,5.06,14,12.06,24.06,6.06"
FIRST_FULL = "2,1,6,7,1,0.006,5,0.006,0.006,0.006,3.006,8,7.006,13.006,1.006"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_text(capsys):
    code, out, _ = run(capsys, "gen", "-m", "2", "-n", "3")
    lines = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert code == 0 and len(lines) == 9
    assert lines[0] == "X1 + X2 -> 0 ; r1" and lines[2] == "X1 -> 2 X3 ; r3"


def test_gen_json(capsys):
    code, out, _ = run(capsys, "gen", "-m", "6", "-n", "5", "--format", "json")
    d = json.loads(out)
    assert code == 0 and len(d["reactions"]) == 15 and d["schema"] == "seqnet/1"


@pytest.mark.parametrize("argv", [["gen", "-m", "0", "-n", "3"], ["witness", "-m", "2", "-n", "4"]])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("seqnet: error")


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["gen", "-n", "3"])
    assert exc.value.code == 2


def test_witness_first_example(capsys):
    code, out, _ = run(capsys, "witness", *FIRST)
    assert code == 0 and "stable states [1, 3]" in out and "eps = 0.006" in out
    code, out, _ = run(capsys, "witness", *FIRST, "--format", "json")
    w = WitnessResult.from_dict(json.loads(out))
    assert w.stable_indices == [1, 3] and verify_witness(w) == []


def test_witness_canonical(capsys):
    code, out, _ = run(capsys, "witness", "-m", "2", "-n", "3", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["bistable"] and 1 in d["stable"]
    assert d["states"][0]["x"] == [1.0, 1.0, 1.0]


def test_witness_outside_region_exits_1(capsys):
    code, out, _ = run(capsys, "witness", "-m", "6", "-n", "5", "--rates", "2,1,6,5,1", "--rn2", "5", "--format", "json")
    assert code == 1 and not json.loads(out)["bistable"]


def test_witness_no_round_exits_1(capsys):
    code, out, _ = run(capsys, "witness", "-m", "2", "-n", "7", "--max-rounds", "1")
    assert code == 1 and "trace" in out


def test_analyze_second_example(capsys):
    code, out, _ = run(capsys, "analyze", "-m", "6", "-n", "5", "--full-rates", SECOND_FULL, "--format", "json")
    d = json.loads(out)
    assert code == 0 and len(d["states"]) == 3 and d["stable"] == [2, 3]
    assert d["region"]["bistability-alt"]["all_satisfied"]


def test_analyze_failed_record(capsys):
    code, out, _ = run(capsys, "region-check", "-m", "6", "-n", "5", "--rates", "2,1,6,5,1", "--rn2", "5", "--format", "json")
    d = json.loads(out)
    assert code == 1
    assert [r["id"] for r in d["records"] if not r["satisfied"]] == ["inflow"]


def test_analyze_seed_state(capsys):
    code, out, _ = run(capsys, "analyze", "-m", "6", "-n", "5", "--full-rates", FIRST_FULL, "--state", "1,1,1,1,1", "--format", "json")
    d = json.loads(out)
    st = d["states"][0]
    assert code == 0 and st["state"]["residual"] == 0 and st["report"]["verdict"] == "certified-stable"


def test_analyze_fraction_input(capsys, tmp_path):
    path = tmp_path / "rates.txt"
    path.write_text("2 1 6 7 1 3/500 5 3/500 3/500 3/500\n1503/500 8 3503/500 6503/500 503/500\n")
    code, out, _ = run(capsys, "analyze", "-m", "6", "-n", "5", "--rates-file", str(path), "--format", "json")
    assert code == 0 and json.loads(out)["stable"] == [1, 3]


def test_analyze_malformed(capsys):
    code, _, err = run(capsys, "analyze", "-m", "6", "-n", "5", "--full-rates", "1,2,3")
    assert code == 2 and "15" in err
    code, _, _ = run(capsys, "analyze", "-m", "6", "-n", "5", "--full-rates", FIRST_FULL, "--state", "1,1,x,1,1")
    assert code == 2


def test_simulate_converges(capsys, tmp_path):
    out = tmp_path / "traj.csv"
    code, _, err = run(capsys, "simulate", "-m", "6", "-n", "5", "--full-rates", FIRST_FULL, "--x0", "1.01,1,1,1,1", "--out", str(out))
    assert code == 0 and "converged to x^(1)" in err
    assert out.read_text().splitlines()[0] == "t,x1,x2,x3,x4,x5"


def test_simulate_zero_horizon(capsys):
    code, out, _ = run(capsys, "simulate", *FIRST, "--x0", "1.01,1,1,1,1", "--t-max", "0")
    assert code == 0 and len(out.splitlines()) == 2


def test_simulate_negative_start(capsys):
    code, _, _ = run(capsys, "simulate", *FIRST, "--x0=-1,1,1,1,1")
    assert code == 2


def test_sweep(capsys, monkeypatch):
    monkeypatch.setenv("SEQNET_THREADS", "1")
    code, out, _ = run(capsys, "sweep", "--m-range", "2-3", "--n-range", "3", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["schema"] == "seqnet/1" and len(d["cells"]) == 2


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "seqnet.cli", "gen", "-m", "2", "-n", "3"], capture_output=True, text=True)
    assert proc.returncode == 0 and "X1 -> 2 X3 ; r3" in proc.stdout
