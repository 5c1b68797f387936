import json
import math
import subprocess
import sys

import numpy as np
import pytest

from lsqcond import mmio
from lsqcond.cli import main


def run_cli(*args):
    return main(list(args))


@pytest.fixture
def gvl_case(tmp_path):
    out = tmp_path / "case1"
    assert run_cli(
        "generate", "gvl", "--alpha", "0.5", "--beta", "2", "--phi", "0",
        "--eps", "1e-6", "--out-dir", str(out),
    ) == 0
    return out


def test_generate_gvl_files(gvl_case):
    assert {p.name for p in gvl_case.iterdir()} == {"A.mtx", "b.txt", "dA.mtx", "expected.json"}
    expected = json.loads((gvl_case / "expected.json").read_text())
    assert expected["expected"]["chi_A_upper"] == pytest.approx(2.0 * math.sqrt(2.0))


def test_analyze_round_trip(gvl_case, tmp_path):
    report_path = tmp_path / "report.json"
    code = run_cli(
        "analyze", "--matrix", str(gvl_case / "A.mtx"), "--rhs", str(gvl_case / "b.txt"),
        "--scales", "relative", "--seed", "42", "--out", str(report_path),
    )
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["estimates"]["relative"]["chi_A_upper"] == pytest.approx(
        2.8284271247, abs=1e-9
    )
    expected = json.loads((gvl_case / "expected.json").read_text())["expected"]
    assert report["geometry"]["kappa"] == pytest.approx(expected["kappa"], rel=1e-10)
    assert report["geometry"]["vds"] == pytest.approx(expected["vds"], rel=1e-10)
    assert report["estimates"]["relative"]["chi_A_upper"] == pytest.approx(
        expected["chi_A_upper"], rel=1e-10
    )


def test_analyze_deterministic_bytes(gvl_case, tmp_path):
    paths = [tmp_path / "r1.json", tmp_path / "r2.json"]
    for path in paths:
        assert run_cli(
            "analyze", "--matrix", str(gvl_case / "A.mtx"), "--rhs", str(gvl_case / "b.txt"),
            "--seed", "42", "--out", str(path),
        ) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_verify_small_run_passes(capsys):
    assert run_cli("verify", "--seed", "1", "--problems", "10", "--samples", "100") == 0
    out = capsys.readouterr().out
    assert out.count("[ ok ]") == 10
    assert "[FAIL]" not in out


def test_verify_full_scale_within_budget(capsys):
    import time

    start = time.perf_counter()
    assert run_cli("verify", "--seed", "1", "--problems", "200", "--samples", "2000") == 0
    assert time.perf_counter() - start < 60.0
    assert "[FAIL]" not in capsys.readouterr().out


def test_compare_text_and_csv(gvl_case, capsys):
    assert run_cli("compare", "--matrix", str(gvl_case / "A.mtx"), "--rhs", str(gvl_case / "b.txt")) == 0
    text = capsys.readouterr().out
    assert "wedin" in text and "stewart" in text and "gvlh" in text
    assert run_cli(
        "compare", "--matrix", str(gvl_case / "A.mtx"), "--rhs", str(gvl_case / "b.txt"),
        "--format", "csv",
    ) == 0
    csv_text = capsys.readouterr().out
    header = csv_text.splitlines()[0]
    assert header == "source,value,scale_convention,ratio_to_tight,max_ratio"


def test_sweep_gvl_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    assert run_cli(
        "sweep", "gvl", "--param", "alpha", "--values", "0.5,0.1", "--beta", "2",
        "--phi", "0", "--samples", "100", "--out", str(out),
    ) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("param,value,m,n,kappa,")
    assert len(lines) == 3
    kappas = [float(line.split(",")[4]) for line in lines[1:]]
    assert kappas == pytest.approx([2.0, 10.0], rel=1e-12)


def test_sweep_deterministic(tmp_path):
    outs = []
    for name in ("s1.csv", "s2.csv"):
        path = tmp_path / name
        assert run_cli(
            "sweep", "ensemble", "--param", "theta", "--values", "0.4,0.8",
            "--samples", "100", "--out", str(path),
        ) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_lanczos_csv(tmp_path):
    T_path = tmp_path / "T.mtx"
    mmio.write_matrix(T_path, np.diag([1.0, 2.0, 3.0]))
    out = tmp_path / "lanczos.csv"
    assert run_cli("lanczos", "--matrix", str(T_path), "--steps", "2", "--out", str(out)) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "step,alpha,beta,theta,predicted_chi,orthogonality_defect,krylov_theta,breakdown"
    assert len(lines) == 3
    assert lines[1].endswith("false")


def test_verify_reports_failures_with_exit_1(monkeypatch, capsys):
    import lsqcond.cli as cli_mod

    monkeypatch.setattr(
        cli_mod, "_SUITES", [("always-fails", lambda seed, problems, samples: (False, "boom"))]
    )
    assert run_cli("verify", "--problems", "1", "--samples", "1") == 1
    assert "[FAIL] always-fails" in capsys.readouterr().out


@pytest.mark.parametrize("preset", ["relative", "b-relative", "absolute"])
def test_analyze_all_scale_presets(gvl_case, tmp_path, preset):
    out = tmp_path / f"{preset}.json"
    assert run_cli(
        "analyze", "--matrix", str(gvl_case / "A.mtx"), "--rhs", str(gvl_case / "b.txt"),
        "--scales", preset, "--samples", "200", "--out", str(out),
    ) == 0
    report = json.loads(out.read_text())
    emp = report["empirical"]
    assert emp["scales"] == preset
    assert emp["lower"] <= emp["value"] <= emp["upper"] * (1.0 + 1e-8)


def test_zero_residual_exits_3(tmp_path, capsys):
    # b inside col(A): condition numbers undefined
    mmio.write_matrix(tmp_path / "A.mtx", np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]))
    mmio.write_vector(tmp_path / "b.txt", np.array([1.0, 2.0, 0.0]))
    code = run_cli("analyze", "--matrix", str(tmp_path / "A.mtx"), "--rhs", str(tmp_path / "b.txt"))
    assert code == 3
    assert "ZeroResidual" in capsys.readouterr().err


def test_missing_file_exits_2(tmp_path, capsys):
    code = run_cli("analyze", "--matrix", str(tmp_path / "nope.mtx"), "--rhs", str(tmp_path / "b.txt"))
    assert code == 2
    assert capsys.readouterr().err != ""


def test_rank_deficient_exits_3(tmp_path, capsys):
    mmio.write_matrix(tmp_path / "A.mtx", np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]))
    mmio.write_vector(tmp_path / "b.txt", np.ones(3))
    code = run_cli("analyze", "--matrix", str(tmp_path / "A.mtx"), "--rhs", str(tmp_path / "b.txt"))
    assert code == 3
    assert "NonFullRank" in capsys.readouterr().err


def test_bad_generator_parameter_exits_2(tmp_path, capsys):
    code = run_cli("generate", "gvl", "--alpha", "2.0", "--beta", "1", "--phi", "0",
                   "--out-dir", str(tmp_path / "x"))
    assert code == 2
    assert "ParamOutOfRange" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    out = tmp_path / "case"
    result = subprocess.run(
        [sys.executable, "-m", "lsqcond", "generate", "gvl", "--alpha", "0.5",
         "--beta", "2", "--phi", "0", "--out-dir", str(out)],
        capture_output=True, text=True,
    )
    assert result.returncode == 0, result.stderr
    assert (out / "A.mtx").exists()
