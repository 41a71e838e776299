import math

import numpy as np
import pytest

from triodlab.geometry import (
    Curve,
    Network,
    TriodFrame,
    canonical_angle,
    d_metric,
    dist_to_triod,
    junction_tag,
    rotation,
    standard_triod,
    validate,
)

RNG = np.random.default_rng(20260808)


def dist_oracle(point, frame, n=200_000, reach=40.0):
    """Brute-force distance: dense sampling of the three rays."""
    s = np.linspace(0.0, reach, n)
    dirs = frame.ray_directions()
    best = math.inf
    for j in range(3):
        pts = frame.xi + s[:, None] * dirs[j]
        best = min(best, float(np.linalg.norm(pts - point, axis=1).min()))
    return best


class TestTriodFrame:
    def test_canonical_angle_window(self):
        for theta in RNG.uniform(-10, 10, 50):
            t = canonical_angle(theta)
            assert -math.pi / 3 < t <= math.pi / 3 + 1e-15
            # same triod modulo the 2*pi/3 symmetry
            k = round((theta - t) / (2 * math.pi / 3))
            assert abs(theta - t - k * 2 * math.pi / 3) < 1e-9

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            TriodFrame(0.0, np.array([np.nan, 0.0]))


class TestStandardTriod:
    def test_outer_endpoints_extent_two(self):
        net = standard_triod(TriodFrame(), extent=2.0, h=0.01)
        tips = sorted(tuple(c.nodes[-1].round(12)) for c in net.curves)
        expect = sorted([(2.0, 0.0), (-1.0, math.sqrt(3.0)), (-1.0, -math.sqrt(3.0))])
        for got, want in zip(tips, expect):
            assert np.allclose(got, want, atol=1e-12)
        assert validate(net) == []

    def test_translation_equivariance(self):
        a = standard_triod(TriodFrame(0.0, np.array([0.3, 0.0])), 1.0, 0.01)
        b = standard_triod(TriodFrame(), 1.0, 0.01)
        for ca, cb in zip(a.curves, b.curves):
            assert np.allclose(ca.nodes, cb.nodes + np.array([0.3, 0.0]), atol=1e-14)

    def test_rotation_preserves_angles(self):
        net = standard_triod(TriodFrame(math.pi / 6), extent=1.0, h=0.01)
        dirs = [c.nodes[1] - c.nodes[0] for c in net.curves]
        dirs = [d / np.linalg.norm(d) for d in dirs]
        assert np.allclose(dirs[0], [math.cos(math.pi / 6), math.sin(math.pi / 6)], atol=1e-12)
        for i in range(3):
            cosang = float(dirs[i] @ dirs[(i + 1) % 3])
            assert abs(cosang - math.cos(2 * math.pi / 3)) < 1e-12

    def test_total_length(self):
        extent = 1.7
        net = standard_triod(TriodFrame(), extent, h=0.013)
        assert abs(net.total_length() - 3 * extent) < 0.013

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            standard_triod(TriodFrame(), -1.0, 0.01)
        with pytest.raises(ValueError):
            standard_triod(TriodFrame(), 1.0, 0.0)
        with pytest.raises(ValueError):
            standard_triod(TriodFrame(), 0.5, 0.5)


class TestDistToTriod:
    def test_point_on_template(self):
        assert dist_to_triod(np.array([1.0, 0.0])) == 0.0

    def test_opposite_point_closed_form(self):
        # projection onto the upper-left ray
        assert abs(dist_to_triod(np.array([-1.0, 0.0])) - math.sqrt(3) / 2) < 1e-12

    def test_sampling_oracle_examples(self):
        frame = TriodFrame()
        for p in [np.array([0.0, 0.2]), np.array([0.7, -0.4]), np.array([-2.0, 0.3])]:
            got = dist_to_triod(p, frame)
            want = dist_oracle(p, frame)
            assert abs(got - want) < 1e-4
        assert abs(dist_to_triod(np.array([0.0, 0.2])) - 0.1) < 1e-9

    def test_frame_equivariance(self):
        for _ in range(25):
            frame = TriodFrame(RNG.uniform(-1, 1), RNG.uniform(-2, 2, 2))
            x = RNG.uniform(-3, 3, 2)
            local = rotation(frame.theta).T @ (x - frame.xi)
            assert abs(dist_to_triod(x, frame) - dist_to_triod(local)) < 1e-12

    def test_lipschitz(self):
        frame = TriodFrame(0.2, np.array([0.1, -0.4]))
        for _ in range(50):
            x, y = RNG.uniform(-2, 2, 2), RNG.uniform(-2, 2, 2)
            dd = abs(dist_to_triod(x, frame) - dist_to_triod(y, frame))
            assert dd <= np.linalg.norm(x - y) + 1e-12


class TestDMetric:
    def test_identity_and_examples(self):
        f = TriodFrame(0.1, np.array([0.2, 0.0]))
        assert d_metric(f, f, 3.0) == 0.0
        ident = TriodFrame()
        assert abs(d_metric(f, ident, 1.0) - 0.2) < 1e-15
        assert abs(d_metric(f, ident, 2.0) - 0.1) < 1e-15

    def test_triangle_inequality(self):
        for _ in range(100):
            frames = [TriodFrame(RNG.uniform(-1, 1), RNG.uniform(-1, 1, 2)) for _ in range(3)]
            R = float(RNG.uniform(0.1, 5))
            a, b, c = frames
            assert d_metric(a, c, R) <= d_metric(a, b, R) + d_metric(b, c, R) + 1e-14

    def test_rejects_bad_scale(self):
        with pytest.raises(ValueError):
            d_metric(TriodFrame(), TriodFrame(), 0.0)


class TestValidate:
    def test_valence_defect(self):
        net = standard_triod(TriodFrame(), 1.0, 0.05)
        # drop one junction-attached curve: valence becomes 2
        broken = Network(net.curves[:2], net.junctions)
        kinds = {v.kind for v in validate(broken)}
        assert "junction_valence" in kinds

    def test_crossing_defect(self):
        x = np.linspace(-1, 1, 21)
        c1 = Curve(np.stack([x, np.zeros_like(x)], axis=1))
        c2 = Curve(np.stack([np.zeros_like(x), x], axis=1))
        bad = Network((c1, c2), {})
        kinds = {v.kind for v in validate(bad)}
        assert "curve_crossing" in kinds

    def test_junction_mismatch(self):
        net = standard_triod(TriodFrame(), 1.0, 0.05)
        moved = dict(net.junctions)
        moved["j0"] = np.array([0.01, 0.0])
        kinds = {v.kind for v in validate(Network(net.curves, moved))}
        assert "junction_mismatch" in kinds

    def test_closed_curve_clean(self):
        ang = np.linspace(0, 2 * math.pi, 65)
        loop = Curve(np.stack([np.cos(ang), np.sin(ang)], axis=1))
        assert loop.closed
        assert validate(Network((loop,), {})) == []

    def test_touching_at_junction_allowed(self):
        net = standard_triod(TriodFrame(), 1.0, 0.05)
        assert validate(net) == []
