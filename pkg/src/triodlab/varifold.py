"""Discrete varifolds, test functions, first variation and the flow inequality residual.

A network becomes a weighted list of (midpoint, tangent, length) atoms, one per
polyline segment.  Mass integrals use midpoint quadrature on the atoms;
curvature integrals use node-based dual-length quadrature because the discrete
curvature lives at nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import Network, TriodFrame, rotation

# Sentinel for the not-integrable branch of the flow functional (never a float).
NOT_INTEGRABLE = object()


def smoothstep(u: np.ndarray) -> np.ndarray:
    """Quintic smoothstep: 0 -> 1 on [0, 1] with vanishing first and second derivatives."""
    u = np.clip(u, 0.0, 1.0)
    return u ** 3 * (10.0 + u * (-15.0 + 6.0 * u))


def smoothstep_d(u: np.ndarray) -> np.ndarray:
    inside = (u > 0.0) & (u < 1.0)
    u = np.clip(u, 0.0, 1.0)
    return np.where(inside, 30.0 * u ** 2 * (1.0 - u) ** 2, 0.0)


def _radial_profile(r: np.ndarray, flat: float, outer: float) -> np.ndarray:
    """1 on [0, flat], quintic fall to 0 at outer."""
    return 1.0 - smoothstep((r - flat) / (outer - flat))


def _radial_profile_d(r: np.ndarray, flat: float, outer: float) -> np.ndarray:
    return -smoothstep_d((r - flat) / (outer - flat)) / (outer - flat)


@dataclass(frozen=True)
class TestFunction:
    """Scalar test function with gradient; vectorized over (n, 2) points."""

    kind: str
    value: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.value(points)


def _radial_test(kind: str, flat: float, outer: float,
                 frame: TriodFrame | None = None, scale: float = 1.0,
                 shift: np.ndarray | None = None) -> TestFunction:
    shift = np.zeros(2) if shift is None else np.asarray(shift, dtype=float)
    rot = rotation(frame.theta) if frame is not None else np.eye(2)
    xi = frame.xi if frame is not None else np.zeros(2)

    def to_arg(points):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return ((p - xi) @ rot) / scale - shift

    def value(points):
        y = to_arg(points)
        return _radial_profile(np.linalg.norm(y, axis=1), flat, outer)

    def grad(points):
        y = to_arg(points)
        r = np.linalg.norm(y, axis=1)
        mag = _radial_profile_d(r, flat, outer)
        with np.errstate(invalid="ignore", divide="ignore"):
            direction = np.where(r[:, None] > 0, y / np.where(r[:, None] > 0, r[:, None], 1.0), 0.0)
        # chain rule back through the rigid motion and scaling
        return (mag[:, None] * direction) @ rot.T / scale

    return TestFunction(kind, value, grad)


def phi_hat() -> TestFunction:
    """Radially symmetric bump: 1 on B_{1/4}, 0 off B_{1/2}, |grad| <= 8."""
    return _radial_test("phi_hat", 0.25, 0.5)


def phi_rad() -> TestFunction:
    """Radially symmetric bump: 1 on B_1, support in B_{3/2}, |grad| <= 4."""
    return _radial_test("phi_rad", 1.0, 1.5)


def phi_j(j: int, frame: TriodFrame | None = None, R: float = 1.0) -> TestFunction:
    """Bump centered at unit distance along ray j of the (scaled) frame."""
    if j not in (1, 2, 3):
        raise ValueError(f"ray index must be 1, 2 or 3, got {j}")
    base = _radial_test("phi_hat", 0.25, 0.5)
    rot_j = rotation(-2.0 * (j - 1) * math.pi / 3.0)
    rot_f = rotation(frame.theta) if frame is not None else np.eye(2)
    xi = frame.xi if frame is not None else np.zeros(2)
    offset = np.array([1.0, 0.0])

    def to_arg(points):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return ((p - xi) @ rot_f) / R @ rot_j.T - offset

    def value(points):
        return base.value(to_arg(points))

    def grad(points):
        g = base.grad(to_arg(points))
        return g @ rot_j @ rot_f.T / R

    return TestFunction(f"phi_{j}", value, grad)


# Profile-pinned constants: c0 = integral of phi_hat along a line through the
# origin, cbold = integral of phi_rad^2 over the standard triod.  The quintic
# profile integrates in closed form (int_0^1 S^2 = 181/462, int_0^1 S = 1/2).
C0_LINE_MASS = 0.75
CBOLD_TRIOD_MASS = 1105.0 / 308.0


@dataclass(frozen=True)
class DiscreteVarifold:
    """Weighted segment atoms: midpoints (m,2), unit tangents (m,2), weights (m,)."""

    midpoints: np.ndarray
    tangents: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.midpoints, dtype=float))
        t = np.atleast_2d(np.asarray(self.tangents, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if not (len(m) == len(t) == len(w)):
            raise ValueError("atom arrays must share a length")
        if len(w) and (np.any(w <= 0) or not np.all(np.isfinite(w))):
            raise ValueError("atom weights must be positive and finite")
        if len(t) and np.any(np.abs(np.linalg.norm(t, axis=1) - 1.0) > 1e-12):
            raise ValueError("atom tangents must be unit vectors")
        object.__setattr__(self, "midpoints", m)
        object.__setattr__(self, "tangents", t)
        object.__setattr__(self, "weights", w)

    def mass(self) -> float:
        return float(self.weights.sum())


def _empty_varifold() -> DiscreteVarifold:
    return DiscreteVarifold(np.zeros((0, 2)), np.zeros((0, 2)), np.zeros(0))


def to_varifold(net: Network, clip: tuple[np.ndarray, float] | None = None) -> DiscreteVarifold:
    """One multiplicity-1 atom per segment, optionally clipped to a ball (center, radius)."""
    mids, tans, wts = [], [], []
    for curve in net.curves:
        a = curve.nodes[:-1]
        b = curve.nodes[1:]
        if clip is not None:
            a, b = _clip_segments(a, b, np.asarray(clip[0], dtype=float), float(clip[1]))
            if len(a) == 0:
                continue
        d = b - a
        lens = np.linalg.norm(d, axis=1)
        keep = lens > 1e-15
        a, b, d, lens = a[keep], b[keep], d[keep], lens[keep]
        if len(a) == 0:
            continue
        mids.append(0.5 * (a + b))
        tans.append(d / lens[:, None])
        wts.append(lens)
    if not mids:
        return _empty_varifold()
    return DiscreteVarifold(np.concatenate(mids), np.concatenate(tans), np.concatenate(wts))


def _clip_segments(a: np.ndarray, b: np.ndarray, center: np.ndarray, radius: float):
    """Intersect segments with a closed ball; returns possibly shortened endpoints."""
    d = b - a
    f = a - center
    A = np.einsum("ij,ij->i", d, d)
    B = 2.0 * np.einsum("ij,ij->i", f, d)
    C = np.einsum("ij,ij->i", f, f) - radius * radius
    disc = B * B - 4.0 * A * C
    ok = (disc > 0) & (A > 0)
    t0 = np.zeros(len(a))
    t1 = np.zeros(len(a))
    sq = np.sqrt(np.where(ok, disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        lo = np.where(ok, (-B - sq) / (2.0 * A), 0.0)
        hi = np.where(ok, (-B + sq) / (2.0 * A), 0.0)
    t0 = np.clip(lo, 0.0, 1.0)
    t1 = np.clip(hi, 0.0, 1.0)
    keep = ok & (t1 - t0 > 1e-15)
    a2 = a[keep] + t0[keep, None] * d[keep]
    b2 = a[keep] + t1[keep, None] * d[keep]
    return a2, b2


def clip_varifold(V: DiscreteVarifold, center: np.ndarray, radius: float) -> DiscreteVarifold:
    """Restrict atoms (straight segments) to a ball."""
    if len(V.weights) == 0:
        return V
    half = 0.5 * V.weights[:, None] * V.tangents
    a, b = _clip_segments(V.midpoints - half, V.midpoints + half,
                          np.asarray(center, dtype=float), float(radius))
    d = b - a
    lens = np.linalg.norm(d, axis=1)
    keep = lens > 1e-15
    if not keep.any():
        return _empty_varifold()
    return DiscreteVarifold(0.5 * (a + b)[keep], d[keep] / lens[keep, None], lens[keep])


def weigh(V: DiscreteVarifold, phi) -> float:
    """||V||(phi) by midpoint quadrature; phi is a TestFunction or plain closure."""
    if len(V.weights) == 0:
        return 0.0
    vals = phi(V.midpoints)
    return float(np.dot(np.asarray(vals, dtype=float).ravel(), V.weights))


@dataclass(frozen=True)
class VectorField:
    """C^1 vector field: value (n,2)->(n,2) and gradient (n,2)->(n,2,2) closures."""

    value: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]


def first_variation(V: DiscreteVarifold, g: VectorField) -> float:
    """delta V(g) = integral of grad g . S over the varifold (S = tangent projection)."""
    if len(V.weights) == 0:
        return 0.0
    G = np.asarray(g.grad(V.midpoints), dtype=float)
    t = V.tangents
    integrand = np.einsum("ni,nij,nj->n", t, G, t)
    return float(np.dot(integrand, V.weights))


# ---------------------------------------------------------------------------
# node quadrature: curvature-weighted integrals on a network
# ---------------------------------------------------------------------------

def node_quadrature(net: Network):
    """Positions, curvature vectors, tangents and dual weights at curvature nodes.

    Open curves contribute their interior nodes, closed curves every node.
    Junction and end nodes carry no curvature and are omitted.
    """
    from .flow import discrete_curvature  # local import, no cycle at call time

    pos, curv, tang, wts = [], [], [], []
    for curve in net.curves:
        n = curve.nodes
        if len(n) < 3:
            continue
        h = discrete_curvature(curve)
        seg = np.diff(n, axis=0)
        lens = np.linalg.norm(seg, axis=1)
        if curve.closed:
            p = n[:-1]
            a = np.roll(lens, 1)  # length of the segment arriving at each node
            w = 0.5 * (a + lens)
            chord = p[np.arange(1, len(p) + 1) % len(p)] - p[np.arange(-1, len(p) - 1)]
        else:
            p = n[1:-1]
            w = 0.5 * (lens[:-1] + lens[1:])
            chord = n[2:] - n[:-2]
        t = chord / np.linalg.norm(chord, axis=1)[:, None]
        pos.append(p)
        curv.append(h)
        tang.append(t)
        wts.append(w)
    if not pos:
        z = np.zeros((0, 2))
        return z, z, z, np.zeros(0)
    return (np.concatenate(pos), np.concatenate(curv),
            np.concatenate(tang), np.concatenate(wts))


def curvature_integral(net: Network, phi) -> float:
    """Integral of |h|^2 phi over the network by node quadrature."""
    pos, curv, _, w = node_quadrature(net)
    if len(w) == 0:
        return 0.0
    vals = np.asarray(phi(pos), dtype=float).ravel()
    return float(np.dot(np.einsum("ij,ij->i", curv, curv) * vals, w))


@dataclass(frozen=True)
class SpaceTimeTest:
    """Nonnegative space-time test function phi(x, t) with spatial gradient and dphi/dt."""

    value: Callable[[np.ndarray, float], np.ndarray]
    grad: Callable[[np.ndarray, float], np.ndarray]
    dt: Callable[[np.ndarray, float], np.ndarray]


def static_spacetime(phi: TestFunction) -> SpaceTimeTest:
    return SpaceTimeTest(
        value=lambda x, t: phi.value(x),
        grad=lambda x, t: phi.grad(x),
        dt=lambda x, t: np.zeros(len(np.atleast_2d(x))),
    )


def flow_functional(net: Network, u_field, t: float, phi: SpaceTimeTest) -> float | object:
    """The dissipation functional int (-phi h + grad phi).(h + u_perp) d||V||.

    Node-based quadrature; returns NOT_INTEGRABLE when the network carries no
    curvature nodes at all (the not-integrable branch of the definition).
    """
    pos, curv, tang, w = node_quadrature(net)
    if len(w) == 0:
        return NOT_INTEGRABLE
    phiv = np.asarray(phi.value(pos, t), dtype=float).ravel()
    grad = np.asarray(phi.grad(pos, t), dtype=float)
    if u_field is None:
        u_perp = np.zeros_like(pos)
    else:
        u = np.asarray(u_field(pos, t), dtype=float)
        u_perp = u - np.einsum("ij,ij->i", u, tang)[:, None] * tang
    vel = curv + u_perp
    integrand = np.einsum("ij,ij->i", -phiv[:, None] * curv + grad, vel)
    return float(np.dot(integrand, w))


def brakke_residual(traj, phi: SpaceTimeTest, t1: float, t2: float,
                    u_field=None) -> float:
    """LHS - RHS of the integrated motion inequality over [t1, t2].

    Negative or near-zero values certify the inequality; a positive value of
    size delta means the mass grew delta faster than the dissipation allows.
    Trapezoid rule in time over the trajectory snapshots in the window.
    """
    if t1 >= t2:
        raise ValueError(f"need t1 < t2, got {t1}, {t2}")
    if u_field is None and not traj.forcing.is_zero:
        u_field = traj.forcing
    snaps = [(t, net) for t, net in traj.snapshots if t1 - 1e-12 <= t <= t2 + 1e-12]
    if len(snaps) < 2:
        raise ValueError(f"no snapshot pair inside [{t1}, {t2}]")
    times = np.array([t for t, _ in snaps])
    gaps = np.diff(times)
    if len(gaps) > 1 and gaps.max() > 2.0 * np.median(gaps) + 1e-12:
        raise ValueError("snapshot gap inside the window exceeds twice the stride")

    rhs_vals = []
    for t, net in snaps:
        b = flow_functional(net, u_field, t, phi)
        if b is NOT_INTEGRABLE:
            raise ValueError(f"flow functional not integrable at t={t}")
        V = to_varifold(net)
        dphi = float(np.dot(np.asarray(phi.dt(V.midpoints, t)).ravel(), V.weights))
        rhs_vals.append(b + dphi)
    rhs = float(np.trapezoid(rhs_vals, times))

    t_a, net_a = snaps[0]
    t_b, net_b = snaps[-1]
    lhs = weigh(to_varifold(net_b), lambda x: phi.value(x, t_b)) \
        - weigh(to_varifold(net_a), lambda x: phi.value(x, t_a))
    return lhs - rhs


@dataclass(frozen=True)
class LengthDefect:
    defect1: float          # H^1 mass in B_1 minus 3
    defect2: float          # ||V||(phi_rad^2) minus the pinned triod mass
    comparator: float       # alpha*mu + beta^2, echoed for the caller's bound


def length_defect(V: DiscreteVarifold, mu_hat: float = 0.0, alpha_hat: float = 0.0,
                  beta_hat: float = 0.0) -> LengthDefect:
    """Triod length defects of a varifold restricted to B_2 (both ~ quadratic in tilt)."""
    mass_b1 = clip_varifold(V, np.zeros(2), 1.0).mass()
    prad = phi_rad()
    mass_rad = weigh(V, lambda x: prad.value(x) ** 2)
    return LengthDefect(mass_b1 - 3.0, mass_rad - CBOLD_TRIOD_MASS,
                        alpha_hat * mu_hat + beta_hat ** 2)


def best_mass_ratio(net: Network, radii: np.ndarray | None = None) -> float:
    """Measured best constant E for ||V||(B_r(x)) <= 2 r E over sampled balls."""
    V = to_varifold(net)
    if len(V.weights) == 0:
        return 0.0
    radii = np.array([0.125, 0.25, 0.5, 1.0]) if radii is None else radii
    centers = V.midpoints[:: max(1, len(V.midpoints) // 64)]
    best = 0.0
    for r in radii:
        for c in centers:
            best = max(best, clip_varifold(V, c, float(r)).mass() / (2.0 * float(r)))
    return best
