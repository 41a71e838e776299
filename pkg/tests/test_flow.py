import math

import numpy as np
import pytest

from triodlab.flow import (
    FlowTrajectory,
    ForcingField,
    Scenario,
    detect_events,
    discrete_curvature,
    herring_residual,
    regrid,
    run,
    step,
)
from triodlab.geometry import Curve, Network, TAG_CLAMPED, TriodFrame, rotation
from triodlab.presets import circle, lens, perturbed_triod, triod


def polygon(n, r=1.0):
    ang = np.linspace(0.0, 2 * math.pi, n + 1)
    nodes = r * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    nodes[-1] = nodes[0]
    return Curve(nodes)


class TestForcingField:
    def test_zeta_constraint(self):
        assert abs(ForcingField(p=2, q=8).zeta - 0.25) < 1e-15
        with pytest.raises(ValueError):
            ForcingField(p=2, q=4)   # zeta = 0

    def test_presets_evaluate(self):
        f = ForcingField("preset", {"name": "vortex", "center": (0, 0), "omega": 2.0})
        out = f(np.array([[1.0, 0.0]]), 0.0)
        assert np.allclose(out, [[0.0, 2.0]])


class TestDiscreteCurvature:
    def test_straight_line_zero(self):
        x = np.linspace(0, 1, 11)
        h = discrete_curvature(Curve(np.stack([x, 2 * x], axis=1)))
        assert np.abs(h).max() < 1e-12

    def test_polygon_curvature_unit_circle(self):
        h = discrete_curvature(polygon(256))
        mags = np.linalg.norm(h, axis=1)
        assert np.abs(mags - 1.0).max() < 1e-3
        # points to the center
        p = polygon(256).nodes[:-1]
        assert np.einsum("ij,ij->i", h, p).max() < 0.0

    def test_richardson_spatial_order(self):
        # uneven-spacing error on an ellipse drops ~4x when n doubles
        def worst(n):
            ang = np.linspace(0, 2 * math.pi, n + 1)
            nodes = np.stack([1.3 * np.cos(ang), np.sin(ang)], axis=1)
            nodes[-1] = nodes[0]
            h = discrete_curvature(Curve(nodes))
            a, b = 1.3, 1.0
            exact = a * b / (np.sqrt((a * np.sin(ang[:-1])) ** 2
                                     + (b * np.cos(ang[:-1])) ** 2) ** 3)
            return np.abs(np.linalg.norm(h, axis=1) - exact).max()

        assert worst(256) / worst(512) > 3.0

    def test_parabola_vertex(self):
        x = np.arange(-5, 6) * 0.01
        h = discrete_curvature(Curve(np.stack([x, x ** 2], axis=1)))
        assert np.allclose(h[4], [0.0, 2.0], atol=1e-3)

    def test_degenerate_spacing_raises(self):
        nodes = np.array([[0, 0], [1e-15, 0], [1, 0]], dtype=float)
        with pytest.raises(ValueError):
            discrete_curvature(Curve(nodes))


class TestStep:
    def test_static_triod_stationary(self):
        net = triod(extent=2.0, h=0.01)
        out = step(net, ForcingField(), 0.0, 1e-5)
        disp = max(np.abs(a.nodes - b.nodes).max() for a, b in zip(net.curves, out.curves))
        assert disp <= 1e-10

    def test_circle_radius_rate(self):
        net = circle(1.0, 256)
        dt = 1e-5
        out = step(net, ForcingField(), 0.0, dt)
        r = np.linalg.norm(out.curves[0].nodes[:-1], axis=1).mean()
        r0 = np.linalg.norm(net.curves[0].nodes[:-1], axis=1).mean()
        assert abs((r - r0) + dt) < 1e-8   # dr = -dt/r at r = 1

    def test_forced_segment_one_step_euler(self):
        # mid-node displacement equals dt * u_perp to solver accuracy
        x = np.linspace(-1, 1, 201)
        seg = Network((Curve(np.stack([x, np.zeros_like(x)], axis=1),
                             (TAG_CLAMPED, TAG_CLAMPED)),), {})
        c = 0.7
        dt = 1e-5
        out = step(seg, ForcingField("constant", {"vector": (0.0, c)}), 0.0, dt)
        mid = len(x) // 2
        disp = out.curves[0].nodes[mid] - seg.curves[0].nodes[mid]
        assert abs(disp[1] - dt * c) < 1e-8
        assert abs(disp[0]) < 1e-12
        # clamped ends never move
        assert np.all(out.curves[0].nodes[0] == seg.curves[0].nodes[0])

    def test_herring_restored_after_perturbation(self):
        net = perturbed_triod(extent=2.0, h=0.01, amplitude=0.02)
        out = step(net, ForcingField(), 0.0, 1e-5)
        assert herring_residual(out) <= 1e-8

    def test_degenerate_spacing_aborts_with_diagnostic(self):
        nodes = np.array([[0.0, 0.0], [0.5, 0.0], [0.5 + 1e-15, 0.0], [1.0, 0.0]])
        net = Network((Curve(nodes, (TAG_CLAMPED, TAG_CLAMPED)),), {})
        with pytest.raises(ArithmeticError, match="curve 0"):
            step(net, ForcingField(), 0.0, 1e-5)


class TestRegrid:
    def test_uniform_curve_unchanged(self):
        x = np.linspace(0, 1, 101)
        c = Curve(np.stack([x, np.zeros_like(x)], axis=1))
        assert regrid(c, 0.01) is c

    def test_collapsed_gap_removed(self):
        x = np.concatenate([np.linspace(0, 0.5, 51), [0.5 + 1e-6], np.linspace(0.51, 1.0, 50)])
        c = Curve(np.stack([x, np.zeros_like(x)], axis=1))
        out = regrid(c, 0.01)
        lens = out.segment_lengths()
        assert lens.min() >= 0.005 and lens.max() <= 0.02

    def test_half_circle_length_preserved(self):
        ang = np.linspace(0, math.pi, 101)
        c = Curve(np.stack([np.cos(ang), np.sin(ang)], axis=1))
        before = c.length()
        out = regrid(c, 0.01)
        assert abs(out.length() - before) / before < 1e-4
        assert np.all(out.nodes[0] == c.nodes[0]) and np.all(out.nodes[-1] == c.nodes[-1])


class TestDetectEvents:
    def test_static_triod_clean(self):
        assert detect_events(triod(2.0, 0.01), 0.05, 0.05) == []

    def test_bridge_precursor(self):
        net = lens(bridge=1e-4, arm=0.5, h=0.03, opening_deg=110.0)
        kinds = {e["kind"] for e in detect_events(net, 1e-3, 1e-5)}
        assert "collision_precursor" in kinds

    def test_junction_proximity(self):
        net = lens(bridge=0.01, arm=0.5, h=0.002, opening_deg=110.0)
        kinds = {e["kind"] for e in detect_events(net, 1e-4, 0.05)}
        assert "junction_collision" in kinds

    def test_vanishing_loop(self):
        kinds = {e["kind"] for e in detect_events(
            Network((polygon(16, r=1e-5),), {}), 1e-3, 1e-3)}
        assert "vanishing_loop" in kinds


class TestRun:
    def test_static_triod_short(self):
        sc = Scenario(initial=triod(2.0, 0.01), dt=5e-5, t_end=0.01,
                      snapshot_stride=20, h_target=0.01)
        traj = run(sc)
        final = traj.snapshots[-1][1]
        disp = max(np.abs(a.nodes - b.nodes).max()
                   for a, b in zip(triod(2.0, 0.01).curves, final.curves))
        assert disp <= 1e-9
        assert traj.events == []

    def test_length_monotone_without_forcing(self):
        sc = Scenario(initial=perturbed_triod(2.0, 0.01, 0.02), dt=5e-5, t_end=0.01,
                      snapshot_stride=10, h_target=0.01)
        traj = run(sc)
        lengths = [net.total_length() for _, net in traj.snapshots]
        for a, b in zip(lengths, lengths[1:]):
            assert b <= a + 1e-10

    def test_herring_and_angles_after_settling(self):
        sc = Scenario(initial=perturbed_triod(2.0, 0.01, 0.02), dt=5e-5, t_end=0.005,
                      snapshot_stride=100, h_target=0.01)
        traj = run(sc)  # 100 steps
        net = traj.snapshots[-1][1]
        assert herring_residual(net) <= 1e-8
        pos = net.junctions["j0"]
        tangents = []
        for ci, end in net.junction_endpoints()["j0"]:
            nb = net.curves[ci].nodes[1] if end == 0 else net.curves[ci].nodes[-2]
            rel = nb - pos
            tangents.append(rel / np.linalg.norm(rel))
        for i in range(3):
            ang = math.degrees(math.acos(np.clip(tangents[i] @ tangents[(i + 1) % 3], -1, 1)))
            assert abs(ang - 120.0) < 0.5

    def test_frame_equivariance(self):
        theta, shift = 0.7, np.array([0.35, -0.2])
        rot = rotation(theta)

        def xform(net):
            curves = tuple(Curve(c.nodes @ rot.T + shift, c.end_tags) for c in net.curves)
            return Network(curves, {k: rot @ v + shift for k, v in net.junctions.items()})

        base = perturbed_triod(2.0, 0.01, 0.02)
        sc_a = Scenario(initial=base, dt=5e-5, t_end=0.005, snapshot_stride=100, h_target=0.01)
        sc_b = Scenario(initial=xform(base), dt=5e-5, t_end=0.005,
                        snapshot_stride=100, h_target=0.01)
        fa = run(sc_a).snapshots[-1][1]
        fb = run(sc_b).snapshots[-1][1]
        for ca, cb in zip(xform(fa).curves, fb.curves):
            assert np.abs(ca.nodes - cb.nodes).max() < 1e-10

    def test_dt_stability_guard(self):
        with pytest.raises(ValueError):
            Scenario(initial=triod(2.0, 0.01), dt=1e-3, t_end=0.1, h_target=0.01)

    def test_velocity_normal_on_circle(self):
        # tangential part of the discrete velocity vanishes on the symmetric polygon
        net = circle(1.0, 128)
        dt = 4e-4
        out = step(net, ForcingField(), 0.0, dt)
        v = (out.curves[0].nodes[:-1] - net.curves[0].nodes[:-1]) / dt
        p = net.curves[0].nodes
        chord = np.roll(p[:-1], -1, axis=0) - np.roll(p[:-1], 1, axis=0)
        tang = chord / np.linalg.norm(chord, axis=1)[:, None]
        v_tan = np.abs(np.einsum("ij,ij->i", v, tang))
        v_norm = np.linalg.norm(v - np.einsum("ij,ij->i", v, tang)[:, None] * tang, axis=1)
        assert (v_tan / v_norm).max() < 1e-6


class TestNetworkAt:
    def test_interpolates_between_snapshots(self):
        a = triod(1.0, 0.05)
        b = Network(tuple(Curve(c.nodes + 0.1, c.end_tags) for c in a.curves),
                    {k: v + 0.1 for k, v in a.junctions.items()})
        traj = FlowTrajectory([(0.0, a), (1.0, b)], ForcingField())
        mid = traj.network_at(0.5)
        assert np.allclose(mid.curves[0].nodes, a.curves[0].nodes + 0.05)
