import json
import subprocess
import sys

import pytest

from cantordim.cli import main
from cantordim.specio import canonical_json


@pytest.fixture
def specs(tmp_path):
    paths = {}
    for name, payload in {
        "fc": {"kind": "full_cube"},
        "ce": {"kind": "ci", "I": {"preperiod": "", "period": "10"}},
        "r1": {"symbolic": {"s": "1", "t": "0"}},
        "rhalf": {"symbolic": {"s": "1/2", "t": "0"}},
        "bad": {"kind": "bogus"},
    }.items():
        p = tmp_path / f"{name}.json"
        p.write_text(canonical_json(payload))
        paths[name] = str(p)
    paths["dir"] = tmp_path
    return paths


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_measure_fullcube(specs, capsys):
    code, out, _ = run(["measure", specs["fc"], specs["r1"],
                        "--scale", "0", "--depth", "16"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["lower"] == "1" and payload["upper"] == "1"
    assert payload["limits"]["depth"] == 16


def test_measure_ci_upper(specs, capsys):
    code, out, _ = run(["measure", specs["ce"], specs["r1"],
                        "--scale", "8", "--depth", "8"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["upper"] == "1/16"  # 2^-|8 cap evens|


def test_measure_bad_spec(specs, capsys):
    code, _, err = run(["measure", specs["bad"], specs["r1"]], capsys)
    assert code == 2 and "unknown set kind" in err


def test_dim_csv_deterministic(specs, capsys):
    code, out1, _ = run(["dim", specs["ce"], "--range", "1:16",
                         "--format", "csv"], capsys)
    assert code == 0
    code, out2, _ = run(["dim", specs["ce"], "--range", "1:16",
                         "--format", "csv"], capsys)
    assert out1 == out2
    lines = out1.strip().splitlines()
    assert lines[0] == "n,N,log2N_over_n"
    assert lines[2] == "2,2,0.500000"


def test_dim_content_sequence_csv(specs, capsys):
    code, out, _ = run(["dim", specs["ce"], "--range", "1:8", "--hfn",
                        specs["r1"], "--format", "csv"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "n,N,N_times_h"
    assert lines[2] == "2,2,1/2"  # N(2^-2) = 2, times 2^-2


def test_dim_json_closed_form(specs, capsys):
    code, out, _ = run(["dim", specs["ce"], "--range", "1:32"], capsys)
    payload = json.loads(out)
    assert payload["closed_form"]["complement_density_lower"] == "1/2"


def test_dim_budget_blowout(specs, tmp_path, capsys):
    big = tmp_path / "bigsum.json"
    base = {"kind": "ci", "I": {"preperiod": "", "period": "10"}}
    spec = base
    for _ in range(6):
        spec = {"kind": "sumset", "a": spec,
                "b": {"kind": "explicit", "tail": "free",
                      "words": [f"{i:08b}" for i in range(0, 256, 3)]}}
    big.write_text(canonical_json(spec))
    code, _, err = run(["dim", str(big), "--range", "1:18", "--budget", "200"],
                       capsys)
    assert code == 3 and "budget" in err


def test_verify_builtins(specs, capsys):
    code, out, _ = run(["verify", "EC3"], capsys)
    assert code == 0 and json.loads(out)["status"] == "pass"
    code, out, _ = run(["verify", "chain-fullcube", "--scale", "0",
                        "--depth", "16"], capsys)
    assert code == 0
    detail = json.loads(out)["detail"]
    assert detail["H_lower"] == detail["H_upper"] == "1"
    code, out, _ = run(["verify", "howroyd-i"], capsys)
    assert code == 0


def test_verify_file_and_corruption(specs, tmp_path, capsys):
    good = tmp_path / "inst.json"
    good.write_text(canonical_json({
        "check": "cover-gamma",
        "set": {"kind": "explicit", "words": ["0000"], "tail": "zeros"},
        "cover": [{"cyl": "0", "group": 0}, {"cyl": "00", "group": 1}],
    }))
    code, out, _ = run(["verify", str(good), "--depth", "6"], capsys)
    assert code == 0
    corrupt = tmp_path / "corrupt.json"
    corrupt.write_text(canonical_json({
        "check": "cover-gamma",
        "set": {"kind": "explicit", "words": ["0000"], "tail": "zeros"},
        "cover": [{"cyl": "0", "group": 0}, {"cyl": "11", "group": 1}],
    }))
    code, out, _ = run(["verify", str(corrupt), "--depth", "6"], capsys)
    assert code == 1
    assert json.loads(out)["detail"]["group_failures"] == [1]


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2


def test_cover_build_and_verify(specs, tmp_path, capsys):
    out_file = tmp_path / "cover.json"
    code, out, _ = run(["cover", "build", "--set", specs["ce"],
                        "--hfn", specs["r1"], "--levels", "4",
                        "--depth", "24", "--cover-out", str(out_file)], capsys)
    assert code == 0
    assert json.loads(out)["status"] == "pass"
    code, out, _ = run(["cover", "verify", "--set", specs["ce"],
                        "--cover", str(out_file), "--depth", "16"], capsys)
    assert code == 0


def test_witness_compile_me(specs, tmp_path, capsys):
    f_file = tmp_path / "f.json"
    code, out, _ = run(["witness", "compile-me", "--hfn", specs["r1"],
                        "--k", "12", "--witness-out", str(f_file)], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["f"] == [0, 1, 2, 4, 7, 11, 16, 22, 29, 37, 46, 56, 67]
    assert payload["inequality_ok"]
    assert json.loads(f_file.read_text())["f"][:3] == [0, 1, 2]


def test_witness_compile_variants(specs, capsys):
    code, out, _ = run(["witness", "compile-nadd", "--hfn", specs["r1"],
                        "--k", "6"], capsys)
    assert code == 0 and json.loads(out)["status"] == "pass"
    code, out, _ = run(["witness", "compile-tprime", "--hfn", specs["r1"],
                        "--k", "6"], capsys)
    assert code == 0 and len(json.loads(out)["f"]) == 7


def test_bad_limits_rejected(specs, capsys):
    code, _, err = run(["measure", specs["fc"], specs["r1"], "--depth", "0"],
                       capsys)
    assert code == 2 and "limits" in err


def test_witness_check_shelahm(specs, tmp_path, capsys):
    w_file = tmp_path / "w.json"
    w_file.write_text(canonical_json({
        "kind": "shelahm", "f": [0, 2, 4, 6, 8, 10], "g": [0, 4, 8, 12],
        "y": {"preperiod": "", "period": "0"},
    }))
    code, out, _ = run(["witness", "check", "--witness", str(w_file),
                        "--x", "0" * 12, "--range", "0:2"], capsys)
    assert code == 0 and json.loads(out)["n0"] == 0


def test_out_file_byte_identical(specs, tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for target in (a, b):
        code = main(["measure", specs["fc"], specs["r1"], "--scale", "0",
                     "--depth", "16", "--out", str(target)])
        assert code == 0
        capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()


def test_entry_point_subprocess(specs):
    proc = subprocess.run(
        [sys.executable, "-m", "cantordim.cli", "measure", specs["fc"],
         specs["r1"], "--scale", "0", "--depth", "12"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["upper"] == "1"


def test_byte_determinism_across_hash_seeds(specs, tmp_path):
    # set-state iteration order must never leak into outputs
    import os
    outputs = []
    for seed in ("1", "2"):
        env = dict(os.environ, PYTHONHASHSEED=seed)
        proc = subprocess.run(
            [sys.executable, "-m", "cantordim.cli", "cover", "build",
             "--set", specs["ce"], "--hfn", specs["r1"], "--levels", "3",
             "--depth", "20",
             "--cover-out", str(tmp_path / f"c{seed}.json")],
            capture_output=True, text=True, env=env)
        assert proc.returncode == 0
        outputs.append(((tmp_path / f"c{seed}.json").read_bytes(), proc.stdout))
    assert outputs[0] == outputs[1]
