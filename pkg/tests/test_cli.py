import json
import subprocess
import sys

import numpy as np
import pytest

from costvr.cli import main
from costvr.io import read_tensor


def _run(argv, capsys):
    code = main(argv)
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_simulate_then_estimate(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("lambda: 2.5\nL_BS: 10.0\nL: 10.0\n")
    code, _, _ = _run(["simulate-bsvr", "--config", str(cfg), "--seed", "4", "--out", str(tmp_path)], capsys)
    assert code == 0
    summ = json.loads((tmp_path / "summary.json").read_text())
    assert summ["seed"] == 4 and len(summ["config_hash"]) == 64
    for method in ("mle", "mome"):
        code, out, _ = _run(["estimate", "--input", str(tmp_path / "intervals_window.csv"),
                             "--method", method], capsys)
        assert code == 0
        assert json.loads(out)["L_BS_hat"] > 0


def test_simulate_batch_json(capsys):
    code, out, _ = _run(["simulate-bsvr", "--trials", "5", "--format", "json"], capsys)
    assert code == 0
    first = json.loads(out[: out.index("}\n") + 2])
    assert len(first["rows"]) == 5


def test_crlb(tmp_path, capsys):
    code, out, _ = _run(["crlb"], capsys)
    d = json.loads(out)
    assert code == 0
    assert d["normalized_lambda"] == pytest.approx(0.04 * 2 / 3)


def test_fit_lifetimes_and_radii(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("lambda: 52.3\nL_BS: 0.81\nL: 15.0\ndelta0: 0.075\n")
    assert main(["simulate-bsvr", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    code, out, _ = _run(["fit-lifetimes", "--input", str(tmp_path / "intervals_window.csv"), "--case", "1"], capsys)
    assert code == 0 and json.loads(out)["fits"][0]["case"] == 1
    code, _, _ = _run(["fit-radii", "--out", str(tmp_path)], capsys)
    assert code == 0
    assert json.loads((tmp_path / "radius_fit.json").read_text())["rmse"] < 1e-6


def test_acf_kinds(tmp_path, capsys):
    for kind in ("bs", "ms", "mpc"):
        cfg = tmp_path / f"{kind}.json"
        cfg.write_text(json.dumps({"kind": kind, "lags": [0.0, 1.0]}))
        code, out, _ = _run(["acf", "--config", str(cfg)], capsys)
        assert code == 0 and "lag,acf" in out


def test_synthesize_and_condition_number(tmp_path, capsys):
    cfg = tmp_path / "s.yaml"
    cfg.write_text("scenario:\n  preset: indoor\n  preset_args: {K: 3, M: 8, T: 2, B: 3, n_mpc: 40}\n")
    code, _, _ = _run(["synthesize", "--config", str(cfg), "--gain", "on", "--out", str(tmp_path)], capsys)
    assert code == 0
    h = read_tensor(tmp_path / "channel.bin")
    assert h.shape == (3, 8, 2, 3)
    code, out, _ = _run(["condition-number", "--input", str(tmp_path / "channel.bin"), "--format", "json"], capsys)
    assert code == 0
    rows = json.loads(out[: out.index("}\n") + 2])["rows"]
    assert len(rows) == 6 and np.all(np.array([r[2] for r in rows]) >= 0)


def test_run_figure_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["run-figure", "fig2-counts", "--seed", "3", "--out", str(d)]) == 0
    capsys.readouterr()
    files = sorted(p.name for p in a.iterdir())
    assert files and files == sorted(p.name for p in b.iterdir())
    for name in files:
        assert (a / name).read_bytes() == (b / name).read_bytes()


@pytest.mark.parametrize("argv,code", [
    (["estimate"], 2),
    (["simulate-bsvr", "--seed", "-1"], 2),
    (["simulate-bsvr", "--trials", "0"], 2),
    (["nope"], 2),
    (["estimate", "--input", "/nonexistent/x.csv"], 1),
    (["run-figure", "fig9"], 2),
])
def test_errors_are_json(argv, code, capsys):
    rc, _, err = _run(argv, capsys)
    assert rc == code
    d = json.loads(err.strip().splitlines()[-1])
    assert set(d) == {"error", "message"}


def test_bad_config_value(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("lambda: -1\n")
    rc, _, err = _run(["simulate-bsvr", "--config", str(cfg)], capsys)
    assert rc == 2 and json.loads(err)["error"] == "invalid-parameter"


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "costvr.cli", "crlb", "--format", "json"],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0
    assert "crlb_lambda" in r.stdout
