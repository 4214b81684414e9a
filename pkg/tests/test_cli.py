import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from wavedelay.cli import ConfigError, load_config, main, parse_config
from wavedelay.spectral import f0


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write_config(tmp_path, **over):
    data = {
        "L": 1.0, "c": 1.0, "f": 0.0, "iota": 1, "N": 64, "t_end": 40.0,
        "schedule": {"kind": "constant"}, "init": {"preset": "sine"},
        "snapshot_times": [0.0, 3.0],
        "outputs": {"energy": "e.csv", "snapshots": "s.csv", "report": "r.json"},
        "verify": {"nx": 401, "t_end": 12.0},
    }
    data.update(over)
    path = tmp_path / "run.json"
    path.write_text(json.dumps(data))
    return path


def test_quintic(capsys):
    code, out, _ = run_cli(capsys, "quintic", "--a", "0.027777777777777776")
    assert code == 0
    doc = json.loads(out)
    assert doc["f"] == pytest.approx((-519801 - 761 * math.sqrt(467857)) / 303170688, rel=1e-12)


def test_spectrum_zero_gain(capsys):
    code, out, _ = run_cli(capsys, "spectrum", "--j", "1", "--f", "0")
    doc = json.loads(out)
    roots = sorted(complex(r["re"], r["im"]).real for r in doc["roots"])
    assert np.allclose(roots, [-1, 0, 0], atol=1e-7)
    assert doc["schur_stable"] is False and code == 0


def test_spectrum_localization(capsys):
    _, out, _ = run_cli(capsys, "spectrum", "--j", "2", "--f", "-0.01")
    doc = json.loads(out)
    assert doc["schur_stable"] and len(doc["localization"]["real_root_brackets"]) == 3


def test_margin_and_matrices(capsys, tmp_path):
    _, out, _ = run_cli(capsys, "margin", "--j", "1", "--tol", "1e-9")
    assert json.loads(out)["margin"] == pytest.approx(math.sqrt(2) - 1, abs=1e-6)
    dest = tmp_path / "m.json"
    run_cli(capsys, "matrices", "--f", repr(f0()), "--out", str(dest))
    doc = json.loads(dest.read_text())
    assert doc["norm_D2"] < 0.994 and doc["norm_H1"] < 0.997 and doc["certified"]


def test_sweep_sorted(capsys, tmp_path):
    dest = tmp_path / "sweep.csv"
    code, _, _ = run_cli(capsys, "sweep", "--j", "1", "--f-min", "-0.6", "--f-max", "0",
                         "--steps", "13", "--out", str(dest))
    rows = list(csv.DictReader(dest.open()))
    fs = [float(r["f"]) for r in rows]
    assert code == 0 and fs == sorted(fs) and len(fs) == 13
    stable = {round(float(r["f"]), 3): r["schur_stable"] == "1" for r in rows}
    assert stable[-0.3] and not stable[-0.5]


def test_simulate_conserved(capsys, tmp_path):
    path = write_config(tmp_path)
    code, out, _ = run_cli(capsys, "simulate", "--config", str(path))
    assert code == 0
    report = json.loads((tmp_path / "r.json").read_text())
    assert report["decay_fit"]["per_period_factor"] == pytest.approx(1.0, abs=1e-12)
    rows = list(csv.reader((tmp_path / "e.csv").open()))
    assert rows[0] == ["t", "E", "E1"] and len(rows) == 22
    snaps = list(csv.reader((tmp_path / "s.csv").open()))
    assert snaps[0] == ["t", "x", "v", "v_t"] and len(snaps) == 1 + 2 * 33


def test_simulate_deterministic_and_lossless(capsys, tmp_path):
    path = write_config(tmp_path, f=f0(), iota=2,
                        schedule={"kind": "random", "seed": 5, "mean_dwell": 6.0})
    run_cli(capsys, "simulate", "--config", str(path))
    first = {n: (tmp_path / n).read_bytes() for n in ("e.csv", "s.csv", "r.json")}
    run_cli(capsys, "simulate", "--config", str(path))
    assert first == {n: (tmp_path / n).read_bytes() for n in ("e.csv", "s.csv", "r.json")}

    from wavedelay.characteristics import simulate
    rc = load_config(path)
    run = simulate(rc.cfg, rc.schedule, rc.init, rc.N, rc.t_end)
    rows = list(csv.reader((tmp_path / "e.csv").open()))[1:]
    for t, e, _ in rows[:5]:
        assert float(e) == run.energy(float(t))


def test_config_errors(capsys, tmp_path):
    bad = [
        ({"c": -1.0}, "wave speed"),
        ({"N": 7}, "N must be"),
        ({"iota": 1, "schedule": {"kind": "random", "seed": 1}}, "iota = 2"),
        ({"iota": 2, "schedule": {"kind": "switching", "switches": [[0.0, 8.0], [0.3, 4.0]]}},
         "lattice"),
        ({"schedule": {"kind": "random"}}, "seed"),
        ({"init": {"preset": "banana"}}, "unknown initial preset"),
        ({"snapshot_times": [100.0]}, "snapshot"),
    ]
    for over, needle in bad:
        path = write_config(tmp_path, **over)
        code, _, err = run_cli(capsys, "simulate", "--config", str(path))
        assert code == 2 and needle in err, (over, err)
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    code, _, err = run_cli(capsys, "simulate", "--config", str(path))
    assert code == 2 and "JSON" in err
    with pytest.raises(ConfigError, match="missing required field"):
        parse_config({"L": 1.0})


def test_verify_passes_and_fails(capsys, tmp_path):
    path = write_config(tmp_path, f=-0.2, t_end=40.0)
    code, out, _ = run_cli(capsys, "verify", "--config", str(path))
    assert code == 0, out
    assert "PASS decay_factor_vs_M0sq" in out and "FAIL" not in out
    path = write_config(tmp_path, f=-0.2, verify={"nx": 101, "t_end": 12.0, "sup_tol": 1e-9})
    code, out, _ = run_cli(capsys, "verify", "--config", str(path))
    assert code == 1 and "FAIL fd_sup_displacement" in out


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "wavedelay.cli", "spectrum", "--j", "1", "--f", "-0.2"],
                         capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["schur_stable"] is True
