import json

import numpy as np
import pytest

from fracsearch import io
from fracsearch.cli import main
from fracsearch.pipeline import auto_steps


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_lattice_summary(capsys):
    code, out, _ = run(capsys, "lattice", "--stage", 1)
    assert code == 0
    assert json.loads(out)["N"] == 8
    code, out, _ = run(capsys, "lattice", "--stage", 0)
    assert json.loads(out)["N"] == 1


def test_lattice_removed_mark_is_usage_error(capsys):
    code, _, err = run(capsys, "lattice", "--stage", 2, "--marked", "4,4")
    assert code == 2
    assert "not part of" in err


def test_lattice_files(tmp_path, capsys):
    code, _, _ = run(capsys, "lattice", "--stage", 2, "--format", "csv", "--out", tmp_path)
    assert code == 0
    lines = (tmp_path / "lattice_s2_adjacency.csv").read_text().splitlines()
    assert lines[0] == "vertex,+x,-x,+y,-y"
    assert len(lines) == 65
    summary = json.loads((tmp_path / "lattice_s2.json").read_text())
    assert "lattice_s2_adjacency.csv" in summary["files"]


def test_search_csv_and_manifest(tmp_path, capsys):
    code, _, err = run(capsys, "search", "--stage", 1, "--steps", 512, "--out", tmp_path)
    assert code == 0
    assert "steps" in err  # progress on stderr
    lines = (tmp_path / "search_s1.csv").read_text().splitlines()
    assert lines[0] == "t,P"
    assert len(lines) == 514
    assert lines[1] == "0,0.125"
    man = json.loads((tmp_path / "search_s1.json").read_text())
    assert man["files"]["search_s1.csv"] == io.digest(tmp_path / "search_s1.csv")
    assert man["config"]["steps"] == 512
    assert abs(man["final_norm_sq"] - 1) < 1e-12


def test_search_is_byte_identical_and_refuses_overwrite(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(capsys, "search", "--stage", 2, "--steps", 300, "--out", d, "--quiet")[0] == 0
    assert (a / "search_s2.csv").read_bytes() == (b / "search_s2.csv").read_bytes()
    code, _, err = run(capsys, "search", "--stage", 2, "--steps", 300, "--out", a, "--quiet")
    assert code == 2 and "--force" in err
    assert run(capsys, "search", "--stage", 2, "--steps", 300, "--out", a, "--quiet", "--force")[0] == 0


def test_search_snapshot(tmp_path, capsys):
    run(capsys, "search", "--stage", 2, "--steps", 100, "--snapshot", 40, "--out", tmp_path, "--quiet")
    rows = (tmp_path / "search_s2_snapshot_t40.csv").read_text().splitlines()
    assert rows[0] == "i,j,P"
    total = sum(float(r.split(",")[2]) for r in rows[1:])
    assert total == pytest.approx(1.0, abs=1e-12)


def test_search_memory_guard(tmp_path, capsys):
    code, _, err = run(capsys, "search", "--stage", 3, "--steps", 100, "--out", tmp_path, "--max-memory", 1e-6)
    assert code == 4
    assert "resource guard" in err
    assert not (tmp_path / "search_s3.csv").exists()


def test_auto_steps_policy():
    assert auto_steps(1) == 64
    assert auto_steps(8) == 256
    assert auto_steps(4096) == 8192
    n = 32768
    assert auto_steps(n) >= 16 * 3.79 * n**0.5647
    assert auto_steps(n) & (auto_steps(n) - 1) == 0


def test_classical_exact_one_step(tmp_path, capsys):
    code, _, _ = run(capsys, "classical", "--stage", 1, "--steps", 1, "--method", "exact", "--out", tmp_path)
    assert code == 0
    assert (tmp_path / "classical_s1_exact.csv").read_text().splitlines() == ["t,P", "0,1", "1,0.5"]


def test_classical_mc_seeded(tmp_path, capsys):
    args = ["classical", "--stage", 2, "--steps", 30, "--method", "mc", "--walkers", 2000, "--seed", 5]
    run(capsys, *args, "--out", tmp_path / "a")
    run(capsys, *args, "--out", tmp_path / "b")
    assert (tmp_path / "a/classical_s2_mc.csv").read_bytes() == (tmp_path / "b/classical_s2_mc.csv").read_bytes()
    man = json.loads((tmp_path / "a/classical_s2_mc.json").read_text())
    assert man["config"]["seed"] == 5 and man["config"]["rule"] == "stay"


def test_classical_memory_guard(tmp_path, capsys):
    code, _, _ = run(capsys, "classical", "--stage", 3, "--steps", 5, "--out", tmp_path, "--max-memory", 1e-6)
    assert code == 4


def test_period_and_fit_commands(tmp_path, capsys):
    t = np.arange(4096)
    from fracsearch.series import TimeSeries

    io.write_series(tmp_path / "sine.csv", TimeSeries(t, 0.3 + 0.1 * np.sin(2 * np.pi * t / 100)))
    code, out, _ = run(capsys, "period", tmp_path / "sine.csv")
    assert code == 0
    assert json.loads(out)["period_Q"] == pytest.approx(100, rel=0.01)

    decay = np.where(t > 0, 2.0 * np.maximum(t, 1) ** -0.85, 1.0)
    io.write_series(tmp_path / "decay.csv", TimeSeries(t, decay))
    code, out, _ = run(capsys, "fit", tmp_path / "decay.csv", "--window", "10:4000")
    payload = json.loads(out)
    assert payload["exponent"] == pytest.approx(-0.85)
    assert payload["d_s"] == pytest.approx(1.7)

    (tmp_path / "nq.csv").write_text("N,Q\n8,10\n64,40\n512,160\n")
    code, out, _ = run(capsys, "fit", tmp_path / "nq.csv")
    assert json.loads(out)["exponent"] == pytest.approx(np.log(4) / np.log(8))


def test_period_on_constant_series(tmp_path, capsys):
    (tmp_path / "flat.csv").write_text("t,P\n" + "".join(f"{i},0.25\n" for i in range(200)))
    code, _, err = run(capsys, "period", tmp_path / "flat.csv")
    assert code == 2
    assert "NoDominantOscillation" in err


def test_malformed_csv_names_line(tmp_path, capsys):
    (tmp_path / "bad.csv").write_text("t,P\n0,0.1\n1,oops\n2,0.3\n")
    code, _, err = run(capsys, "period", tmp_path / "bad.csv")
    assert code == 2
    assert "bad.csv:3" in err


def test_hypothesis_carpet_literature(capsys):
    code, out, _ = run(capsys, "hypothesis", "--b", 0.5647, "--berr", 0.0006, "--a", 0.154, "--aerr", 0.002,
                       "--ds", 1.742, "--dserr", 0.008, "--dE", 2, "--M", 8, "--s", 3)
    assert code == 0
    hyp = json.loads(out)["hypothesis"]
    assert abs(hyp["lhs_c"] - 0.641) <= 0.001
    assert hyp["rhs"] == pytest.approx(0.634789, abs=1e-6)
    assert hyp["rhs_err"] == pytest.approx(0.008)
    assert json.loads(out)["inverse_spectral"]["one_over_ds_str"] == "0.574(3)"


@pytest.mark.parametrize("preset,expected", [("gasket", 0.95017), ("tetrahedron", 0.77370)])
def test_hypothesis_presets(capsys, preset, expected):
    code, out, _ = run(capsys, "hypothesis", "--preset", preset)
    assert code == 0
    assert json.loads(out)["hypothesis"]["rhs"] == pytest.approx(expected, abs=5e-5)


def test_hypothesis_requires_ds(capsys):
    assert run(capsys, "hypothesis", "--b", 0.5)[0] == 2


def test_pipeline_smoke(tmp_path, capsys):
    out = tmp_path / "run"
    code, stdout, _ = run(capsys, "pipeline", "--stages", "1-3", "--classical-stage", 4,
                          "--classical-steps", 2000, "--window", "50:1000", "--out", out, "--quiet")
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "ok"
    assert summary["q_fit"]["sample_count"] == 3
    assert summary["q_fit"]["stderr_exponent"] > 0
    for name in summary["manifests"]:
        assert (out / name).exists()
    assert summary["manifests"] == ["search_s1.json", "search_s2.json", "search_s3.json", "classical_s4.json"]
    for rec in summary["stages"]:
        man = json.loads((out / rec["manifest"]).read_text())
        assert man["files"][f"search_s{rec['stage']}.csv"] == io.digest(out / f"search_s{rec['stage']}.csv")

    code, hyp, _ = run(capsys, "hypothesis", "--summary", out / "summary.json")
    assert code == 0
    assert json.loads(hyp)["hypothesis"]["lhs_c"] == pytest.approx(summary["hypothesis"]["lhs_c"])


def test_pipeline_failure_keeps_partial_summary(tmp_path, capsys):
    out = tmp_path / "run"
    code, _, _ = run(capsys, "pipeline", "--stages", "1,2", "--classical-stage", 3, "--classical-steps", 100,
                     "--start", "4,4", "--out", out, "--quiet")
    assert code == 2
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "failed"
    assert [r["stage"] for r in summary["stages"]] == [1, 2]
    assert summary["manifests"] == ["search_s1.json", "search_s2.json"]


def test_pipeline_rejects_unordered_stages(tmp_path, capsys):
    assert run(capsys, "pipeline", "--stages", "3,2", "--out", tmp_path)[0] == 2
