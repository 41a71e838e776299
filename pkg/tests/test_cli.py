import json
from pathlib import Path

import numpy as np
import pytest

from triodlab.cli import main
from triodlab.serialize import read_trajectory, write_trajectory


def write_cfg(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


TRIOD_CFG = """
preset = triod
extent = 2.0
h_target = 0.01
dt = 5e-5
t_end = 0.02
snapshot_stride = 40
"""

LENS_CFG = """
preset = lens
bridge = 0.25
arm = 0.8
opening_deg = 108
h_target = 0.01
dt = 5e-5
t_end = 1.0
snapshot_stride = 100
"""


@pytest.fixture(scope="module")
def triod_run(tmp_path_factory):
    base = tmp_path_factory.mktemp("cli_triod")
    cfg = write_cfg(base / "triod.cfg", TRIOD_CFG)
    out = base / "out"
    assert main(["run", "--scenario", str(cfg), "--out", str(out)]) == 0
    return out / "triod.jsonl"


class TestCmdRun:
    def test_triod_snapshot_count(self, triod_run):
        traj = read_trajectory(triod_run)
        assert len(traj.snapshots) == 11   # 400 steps / stride 40, plus final
        events = (triod_run.parent / "triod.events.jsonl").read_text()
        assert events == ""

    def test_lens_halts_exit_2(self, tmp_path):
        cfg = write_cfg(tmp_path / "lens.cfg", LENS_CFG)
        out = tmp_path / "out"
        code = main(["run", "--scenario", str(cfg), "--out", str(out)])
        assert code == 2
        events = [json.loads(line) for line in
                  (out / "lens.events.jsonl").read_text().splitlines()]
        assert any(e["kind"] == "junction_collision" for e in events)

    def test_missing_scenario_exit_1(self, tmp_path, capsys):
        code = main(["run", "--scenario", str(tmp_path / "nope.cfg"), "--out", str(tmp_path)])
        assert code == 1
        assert "nope.cfg" in capsys.readouterr().err


class TestCmdDiagnose:
    def test_static_triod_small_defects(self, triod_run, tmp_path):
        out = tmp_path / "diag"
        assert main(["diagnose", "--traj", str(triod_run), "--out", str(out)]) == 0
        rows = {}
        lines = (out / "diagnostics.csv").read_text().splitlines()
        for line in lines[1:]:
            parts = line.split(",")
            rows.setdefault(parts[0], []).append(float(parts[-1]))
        assert rows["mu_star"][0] <= 1e-5
        assert rows["curvature_energy"][0] <= 1e-8
        assert rows["herring_residual"][0] <= 1e-8
        assert abs(rows["mass_ratio_sup"][0] - 1.5) < 0.05

    def test_byte_identical_repeat(self, triod_run, tmp_path):
        out1, out2 = tmp_path / "d1", tmp_path / "d2"
        assert main(["diagnose", "--traj", str(triod_run), "--out", str(out1)]) == 0
        assert main(["diagnose", "--traj", str(triod_run), "--out", str(out2)]) == 0
        assert (out1 / "diagnostics.csv").read_bytes() == (out2 / "diagnostics.csv").read_bytes()

    def test_window_exceeding_domain_exit_1(self, triod_run, tmp_path, capsys):
        code = main(["diagnose", "--traj", str(triod_run), "--out", str(tmp_path),
                     "--window", "0,0,0.01,1.0"])
        assert code == 1
        assert "window" in capsys.readouterr().err


class TestCmdClassifyDecayExport:
    def test_classify_smooth_curve_empty(self, tmp_path):
        # a straight static segment: no singular points anywhere
        import math
        from triodlab.flow import FlowTrajectory, ForcingField
        from triodlab.geometry import Curve, Network
        x = np.linspace(-2, 2, 401)
        net = Network((Curve(np.stack([x, np.zeros_like(x)], axis=1)),), {})
        traj = FlowTrajectory([(t, net) for t in np.linspace(0, 1, 201)], ForcingField())
        p = tmp_path / "seg.jsonl"
        write_trajectory(p, traj)
        out = tmp_path / "cls"
        assert main(["classify", "--traj", str(p), "--out", str(out),
                     "--window", "0,0,0.5,0.3", "--grid", "3,3,2"]) == 0
        lines = (out / "strata.csv").read_text().splitlines()
        assert len(lines) == 1   # header only

    def test_decay_and_export_on_static_triod(self, tmp_path):
        from triodlab.flow import FlowTrajectory, ForcingField
        from triodlab.presets import triod as triod_net
        net = triod_net(3.0, 0.01)
        traj = FlowTrajectory([(t, net) for t in np.linspace(0, 1, 101)], ForcingField())
        p = tmp_path / "triod.jsonl"
        write_trajectory(p, traj)
        out = tmp_path / "dec"
        assert main(["decay", "--traj", str(p), "--out", str(out),
                     "--center", "0,0,0.5", "--scales", "0.4,0.2,0.1"]) == 0
        payload = json.loads((out / "decay.json").read_text())
        assert payload["at_noise_floor"] is True
        assert len(payload["points"]) == 3
        assert main(["export", "--traj", str(p), "--out", str(out),
                     "--center", "0,0,0.5", "--tau0", "0.08"]) == 0
        track = (out / "track.csv").read_text().splitlines()
        assert track[0] == "t,x,y,gap"
        assert len(track) == 102
        holder = json.loads((out / "holder.json").read_text())
        assert holder["infinite_regularity"] is True
        prof = json.loads((out / "density_profile.json").read_text())
        assert abs(prof["extrapolated"] - 1.5) < 1e-3
