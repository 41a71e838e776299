import math

import numpy as np
import pytest

from triodlab.density import (
    DensityProfile,
    TangentConfig,
    classify_tangent,
    density_limit,
    gaussian_density,
    parabolic_rescale,
    rho,
    spacetime_grid,
    stratify,
)
from triodlab.flow import FlowTrajectory, ForcingField
from triodlab.geometry import Curve, Network
from triodlab.presets import circle, triod


def static_traj(net, t0=0.0, t1=1.0, n=101):
    return FlowTrajectory([(t, net) for t in np.linspace(t0, t1, n)], ForcingField())


def line_network(half=3.0, n=1201):
    x = np.linspace(-half, half, n)
    return Network((Curve(np.stack([x, np.zeros_like(x)], axis=1)),), {})


def x_network(half=3.0, n=1201):
    x = np.linspace(-half, half, n)
    return Network((Curve(np.stack([x, np.zeros_like(x)], axis=1)),
                    Curve(np.stack([np.zeros_like(x), x], axis=1))), {})


class TestRho:
    def test_plug_in_value(self):
        assert abs(rho(np.zeros(2), 1.0, np.zeros(2), 0.0)
                   - 1.0 / math.sqrt(4 * math.pi)) < 1e-12

    def test_line_normalization(self):
        x = np.linspace(-40, 40, 400_001)
        pts = np.stack([x, np.zeros_like(x)], axis=1)
        for t in (0.0, 0.9):
            vals = rho(np.zeros(2), 1.0, pts, t)
            assert abs(np.trapezoid(vals, x) - 1.0) < 1e-9

    def test_monotone_in_distance(self):
        d = np.linspace(0, 3, 50)
        pts = np.stack([d, np.zeros_like(d)], axis=1)
        vals = rho(np.zeros(2), 1.0, pts, 0.5)
        assert np.all(np.diff(vals) <= 0)

    def test_rejects_future_pole(self):
        with pytest.raises(ValueError):
            rho(np.zeros(2), 0.0, np.zeros(2), 0.0)


class TestGaussianDensity:
    def test_static_line_is_one(self):
        traj = static_traj(line_network(half=3.0, n=2401))
        val = gaussian_density(traj, np.zeros(2), 0.5, 0.05)
        assert abs(val - 1.0) < 1e-4

    def test_triod_vertex_three_halves(self):
        traj = static_traj(triod(extent=3.0, h=0.005))
        val = gaussian_density(traj, np.zeros(2), 0.5, 0.05)
        assert abs(val - 1.5) < 1e-3

    def test_four_ray_crossing_two(self):
        traj = static_traj(x_network())
        val = gaussian_density(traj, np.zeros(2), 0.5, 0.05)
        assert abs(val - 2.0) < 1e-3

    def test_truncation_floor_enforced(self):
        traj = static_traj(line_network())
        with pytest.raises(ValueError):
            gaussian_density(traj, np.zeros(2), 0.5, 0.05, R_trunc=0.1)

    def test_tau_resolution_guard(self):
        traj = static_traj(line_network(), n=11)   # gap 0.1
        with pytest.raises(ValueError):
            gaussian_density(traj, np.zeros(2), 0.5, 0.05)


class TestDensityLimit:
    def test_regular_point_on_circle_flow(self, circle_run_256):
        traj = circle_run_256
        s = 0.15
        r = math.sqrt(1 - 2 * s)
        prof = density_limit(traj, np.array([r, 0.0]), s, (0.02, 0.01, 0.005))
        assert abs(prof.extrapolated - 1.0) < 1e-2

    def test_point_off_network(self, circle_run_256):
        prof = density_limit(circle_run_256, np.array([2.5, 2.5]), 0.15, (0.02, 0.01, 0.005))
        assert prof.extrapolated < 1e-3

    def test_huisken_monotone_on_circle(self, circle_run_256):
        # vanishing point of the exact solution: t* = 1/2, center 0
        prof = density_limit(circle_run_256, np.zeros(2), 0.5, (0.4, 0.3, 0.25))
        assert prof.monotone

    def test_huisken_monotone_on_triod(self):
        traj = static_traj(triod(extent=3.0, h=0.005))
        prof = density_limit(traj, np.zeros(2), 0.5, (0.08, 0.04, 0.02))
        assert prof.monotone
        assert abs(prof.extrapolated - 1.5) < 1e-3

    def test_requires_three_taus(self):
        traj = static_traj(line_network())
        with pytest.raises(ValueError):
            density_limit(traj, np.zeros(2), 0.5, (0.1, 0.05))

    def test_profile_invariants(self):
        with pytest.raises(ValueError):
            DensityProfile((0, 0, 0), (0.1, 0.2), (1.0, 1.0), 1.0, True)


class TestParabolicRescale:
    def test_triod_self_similarity(self):
        net = triod(extent=4.0, h=0.01)
        traj = static_traj(net, t0=-1.0, t1=0.0, n=401)
        zoom = parabolic_rescale(traj, (np.zeros(2), 0.0), 0.5)
        val = gaussian_density(zoom, np.zeros(2), 0.0, 0.05)
        assert abs(val - 1.5) < 1e-3

    def test_group_property(self):
        net = triod(extent=2.0, h=0.05)
        traj = static_traj(net, t0=0.0, t1=1.0, n=11)
        center = (np.array([0.3, -0.2]), 0.9)
        once = parabolic_rescale(traj, center, 0.35 * 0.4)
        twice = parabolic_rescale(parabolic_rescale(traj, center, 0.35),
                                  (np.zeros(2), 0.0), 0.4)
        for (ta, na), (tb, nb) in zip(once.snapshots, twice.snapshots):
            assert abs(ta - tb) < 1e-12
            for ca, cb in zip(na.curves, nb.curves):
                assert np.abs(ca.nodes - cb.nodes).max() < 1e-12

    def test_density_rescaling_invariance(self, circle_run_256):
        traj = circle_run_256
        y, s, lam, tau = np.array([0.6, 0.1]), 0.2, 0.37, 0.11
        zoom = parabolic_rescale(traj, (y, s), lam)
        a = gaussian_density(zoom, np.zeros(2), 0.0, tau)
        b = gaussian_density(traj, y, s, lam * lam * tau)
        assert abs(a - b) < 1e-6

    def test_shrinking_circle_rescalings_match_law(self, circle_run_256):
        # about the vanishing space-time point, both zooms are sqrt(-2t) circles
        center = (np.zeros(2), 0.5)
        for lam, t in ((1.0, -0.3), (0.5, -1.2)):
            zoom = parabolic_rescale(circle_run_256, center, lam)
            net = zoom.network_at(t)
            r = np.linalg.norm(net.curves[0].nodes[:-1], axis=1)
            assert abs(r.mean() - math.sqrt(-2 * t)) < 2e-3
            assert r.std() < 1e-6


class TestClassify:
    def test_static_line_label(self):
        traj = static_traj(line_network(), t0=-1.0, t1=1.0, n=201)
        label = classify_tangent(traj, (np.zeros(2), 0.0))
        assert label.kind == "static_line"
        assert label.spine_dim_estimate == 1

    def test_static_triod_label(self):
        traj = static_traj(triod(extent=3.0, h=0.005), t0=-1.0, t1=1.0, n=201)
        label = classify_tangent(traj, (np.zeros(2), 0.0))
        assert label.kind == "static_triple_junction"
        assert label.spine_dim_estimate == 0
        assert 1.4 <= label.theta_star <= 1.6

    def test_static_x_label(self):
        traj = static_traj(x_network(), t0=-1.0, t1=1.0, n=201)
        label = classify_tangent(traj, (np.zeros(2), 0.0))
        assert label.kind == "static_density_ge2"
        assert label.theta_star >= 1.9

    def test_moving_regular_point_static_line_small_zoom(self, circle_run_256):
        s = 0.15
        r = math.sqrt(1 - 2 * s)
        cfg = TangentConfig(tau0=0.02, lambda_scale=0.05)
        label = classify_tangent(circle_run_256, (np.array([r, 0.0]), s), cfg)
        assert label.kind == "static_line"

    def test_shrinking_circle_not_static(self, circle_run_vanish):
        cfg = TangentConfig(tau0=0.08, lambda_scale=0.3)
        label = classify_tangent(circle_run_vanish, (np.zeros(2), 0.5), cfg)
        assert label.kind in ("shrinking", "unresolved")
        assert label.static_score < 0.5

    def test_quasi_static_vanishing_line(self):
        # a line that disappears at t = 0: line support before, empty after
        net = line_network()
        empty = Network((Curve(np.array([[50.0, 50.0], [51.0, 50.0]])),), {})
        snaps = [(t, net) for t in np.linspace(-1.0, 0.0, 101)]
        snaps += [(t, empty) for t in np.linspace(0.01, 0.5, 50)]
        traj = FlowTrajectory(snaps, ForcingField())
        label = classify_tangent(traj, (np.zeros(2), 0.0))
        assert label.kind == "quasi_static"
        assert label.spine_dim_estimate == 1

    def test_empty_point(self, circle_run_256):
        label = classify_tangent(circle_run_256, (np.array([2.0, 2.0]), 0.2))
        assert label.kind == "empty"

    def test_clearing_out_shadow(self, circle_run_256):
        # tiny density implies empty support in a small parabolic neighborhood
        y, s, tau = np.array([2.0, 2.0]), 0.2, 0.04
        val = gaussian_density(circle_run_256, y, s, tau)
        assert val < 0.05
        r = 0.1 * math.sqrt(tau)
        for t in (s - tau / 2, s, s + tau / 2):
            net = circle_run_256.network_at(t)
            for c in net.curves:
                assert np.linalg.norm(c.nodes - y, axis=1).min() > r


class TestStratify:
    def test_smooth_flow_empty(self, circle_run_256):
        s = 0.15
        r = math.sqrt(1 - 2 * s)
        grid = spacetime_grid((r - 0.05, r + 0.05), (-0.05, 0.05), (0.1, 0.2), 3, 3, 2)
        cfg = TangentConfig(tau0=0.02, lambda_scale=0.05)
        assert stratify(circle_run_256, grid, cfg) == []

    def test_triod_junction_found(self):
        traj = static_traj(triod(extent=3.0, h=0.005), t0=-1.0, t1=1.0, n=801)
        grid = spacetime_grid((-0.3, 0.3), (-0.3, 0.3), (-0.2, 0.2), 3, 3, 2)
        cfg = TangentConfig(tau0=0.02)
        pts = stratify(traj, grid, cfg)
        assert len(pts) == 2   # the vertex appears at both grid times, nothing else
        for p in pts:
            assert p.label.kind == "static_triple_junction"
            assert p.dimension == 2
            assert abs(p.y[0]) < 1e-9 and abs(p.y[1]) < 1e-9
