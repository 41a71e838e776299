"""Front-tracking integrator for v = h + u_perp on triple-junction networks.

One step is (i) a semi-implicit update of every curve's interior nodes --
backward in the arclength Laplacian, explicit in the forcing and in the
coefficients -- followed by (ii) moving each junction to the Fermat point of
its three neighbor nodes, which is the discrete version of the 120 degree
balance, and (iii) never moving clamped ends.  Regridding and event detection
run between steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded

from .geometry import (
    Curve,
    Network,
    TAG_CLAMPED,
    tag_junction_id,
    validate,
)

DEGENERATE_SPACING = 1e-14


@dataclass(frozen=True)
class ForcingField:
    """Ambient vector field u(x, t) with the integrability exponents (p, q).

    kinds: 'zero'; 'constant' (params['vector']); 'preset' with name
    'translation' (vector) or 'vortex' (center, omega); 'closure' for derived
    fields such as parabolic rescalings.
    """

    kind: str = "zero"
    params: dict = field(default_factory=dict)
    p: float = 2.0
    q: float = 8.0
    fn: Callable[[np.ndarray, float], np.ndarray] | None = None

    def __post_init__(self):
        if self.zeta <= 0:
            raise ValueError(f"need 1 - 1/p - 2/q > 0, got p={self.p}, q={self.q}")
        if self.kind not in ("zero", "constant", "preset", "closure"):
            raise ValueError(f"unknown forcing kind {self.kind!r}")
        if self.kind == "closure" and self.fn is None:
            raise ValueError("closure forcing needs fn")

    @property
    def zeta(self) -> float:
        return 1.0 - 1.0 / self.p - 2.0 / self.q

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"

    def __call__(self, points: np.ndarray, t: float) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == "zero":
            return np.zeros_like(pts)
        if self.kind == "constant":
            return np.broadcast_to(np.asarray(self.params["vector"], float), pts.shape).copy()
        if self.kind == "preset":
            name = self.params["name"]
            if name == "translation":
                return np.broadcast_to(np.asarray(self.params["vector"], float), pts.shape).copy()
            if name == "vortex":
                c = np.asarray(self.params.get("center", (0.0, 0.0)), float)
                om = float(self.params.get("omega", 1.0))
                rel = pts - c
                return om * np.stack([-rel[:, 1], rel[:, 0]], axis=1)
            raise ValueError(f"unknown forcing preset {name!r}")
        out = np.asarray(self.fn(pts, t), dtype=float)
        if not np.all(np.isfinite(out)):
            raise ValueError(f"forcing not finite at t={t}")
        return out

    def rescaled(self, y: np.ndarray, s: float, lam: float) -> "ForcingField":
        """Forcing of the parabolically rescaled flow: u -> lam * u(y + lam x, s + lam^2 t)."""
        if self.kind == "zero":
            return self
        if self.kind == "constant":
            v = lam * np.asarray(self.params["vector"], float)
            return ForcingField("constant", {"vector": v}, self.p, self.q)
        y = np.asarray(y, dtype=float)
        base = self

        def fn(pts, t):
            return lam * base(y + lam * pts, s + lam * lam * t)

        return ForcingField("closure", {}, self.p, self.q, fn=fn)


@dataclass(frozen=True)
class Scenario:
    initial: Network
    forcing: ForcingField = field(default_factory=ForcingField)
    dt: float = 1e-5
    t_end: float = 0.1
    t_start: float = 0.0
    snapshot_stride: int = 100
    h_target: float = 0.01
    eps_len: float | None = None     # default 5 * h_target
    eps_col: float | None = None
    clamp_motion: Callable[[np.ndarray, float], np.ndarray] | None = None
    validate_snapshots: bool = True

    def __post_init__(self):
        if self.dt <= 0 or self.t_end <= self.t_start:
            raise ValueError("need dt > 0 and t_end > t_start")
        if self.dt > self.h_target ** 2 / 2 + 1e-18:
            raise ValueError(
                f"dt={self.dt} exceeds the stability margin h_target^2/2={self.h_target ** 2 / 2}")
        if self.snapshot_stride < 1:
            raise ValueError("snapshot stride must be >= 1")
        for name in ("eps_len", "eps_col"):
            if getattr(self, name) is None:
                object.__setattr__(self, name, 5.0 * self.h_target)


@dataclass
class FlowTrajectory:
    """Time-sorted snapshots plus the forcing descriptor and recorded events."""

    snapshots: list[tuple[float, Network]]
    forcing: ForcingField = field(default_factory=ForcingField)
    events: list[tuple[float, dict]] = field(default_factory=list)

    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.snapshots])

    def time_range(self) -> tuple[float, float]:
        ts = self.times()
        return float(ts[0]), float(ts[-1])

    def median_gap(self) -> float:
        ts = self.times()
        if len(ts) < 2:
            return 0.0
        return float(np.median(np.diff(ts)))

    def network_at(self, t: float) -> Network:
        """Network at time t: linear node interpolation between the bracketing
        snapshots when their topologies match, else the nearest snapshot."""
        ts = self.times()
        if t <= ts[0]:
            return self.snapshots[0][1]
        if t >= ts[-1]:
            return self.snapshots[-1][1]
        hi = int(np.searchsorted(ts, t))
        lo = hi - 1
        (ta, na), (tb, nb) = self.snapshots[lo], self.snapshots[hi]
        lam = (t - ta) / (tb - ta)
        same = len(na.curves) == len(nb.curves) and all(
            len(ca.nodes) == len(cb.nodes) and ca.end_tags == cb.end_tags
            for ca, cb in zip(na.curves, nb.curves))
        if not same:
            return na if (t - ta) <= (tb - t) else nb
        curves = tuple(
            Curve((1 - lam) * ca.nodes + lam * cb.nodes, ca.end_tags)
            for ca, cb in zip(na.curves, nb.curves))
        junctions = {k: (1 - lam) * na.junctions[k] + lam * nb.junctions[k]
                     for k in na.junctions}
        return Network(curves, junctions)


def discrete_curvature(curve: Curve) -> np.ndarray:
    """Curvature vectors by arclength-weighted second differences.

    Open curves: one vector per interior node.  Closed curves: one per unique
    node, with cyclic neighbors.
    """
    n = curve.nodes
    if len(n) < 3:
        raise ValueError("curvature needs at least 3 nodes")
    seg = np.diff(n, axis=0)
    lens = np.linalg.norm(seg, axis=1)
    if curve.closed:
        a = np.roll(lens, 1)[:, None]
        b = lens[:, None]
        if np.any(a < DEGENERATE_SPACING) or np.any(b < DEGENERATE_SPACING):
            raise ValueError("degenerate node spacing")
        p = n[:-1]
        fwd = np.roll(p, -1, axis=0) - p
        bwd = p - np.roll(p, 1, axis=0)
        return 2.0 * (fwd / b - bwd / a) / (a + b)
    a = lens[:-1, None]
    b = lens[1:, None]
    if np.any(a < DEGENERATE_SPACING) or np.any(b < DEGENERATE_SPACING):
        raise ValueError("degenerate node spacing")
    return 2.0 * (seg[1:] / b - seg[:-1] / a) / (a + b)


def _u_perp(u: np.ndarray, nodes: np.ndarray, closed: bool) -> np.ndarray:
    """Forcing minus its projection onto the segment-averaged discrete tangent."""
    if closed:
        p = nodes[:-1]
        chord = np.roll(p, -1, axis=0) - np.roll(p, 1, axis=0)
    else:
        chord = nodes[2:] - nodes[:-2]
    tang = chord / np.linalg.norm(chord, axis=1)[:, None]
    return u - np.einsum("ij,ij->i", u, tang)[:, None] * tang


def _solve_open(nodes: np.ndarray, rhs_u: np.ndarray | None, dt: float) -> np.ndarray:
    """One semi-implicit step with fixed endpoints; returns the new node array."""
    seg = nodes[1:] - nodes[:-1]
    lens = np.sqrt(np.einsum("ij,ij->i", seg, seg))
    if lens.min() < DEGENERATE_SPACING:
        raise ArithmeticError("degenerate spacing before tridiagonal solve")
    a = lens[:-1]
    b = lens[1:]
    cm = 2.0 / (a * (a + b))
    cp = 2.0 / (b * (a + b))
    m = len(a)
    ab = np.zeros((3, m))
    ab[0, 1:] = -dt * cp[:-1]
    ab[1, :] = 1.0 + dt * (cm + cp)
    ab[2, :-1] = -dt * cm[1:]
    rhs = nodes[1:-1].copy()
    if rhs_u is not None:
        rhs += dt * rhs_u
    rhs[0] += dt * cm[0] * nodes[0]
    rhs[-1] += dt * cp[-1] * nodes[-1]
    sol = solve_banded((1, 1), ab, rhs, check_finite=False)
    if not np.all(np.isfinite(sol)):
        raise ArithmeticError("tridiagonal solve produced non-finite values")
    out = nodes.copy()
    out[1:-1] = sol
    return out


def _solve_closed(nodes: np.ndarray, rhs_u: np.ndarray | None, dt: float) -> np.ndarray:
    """Cyclic variant (Sherman-Morrison closure of the banded solve)."""
    p = nodes[:-1]
    seg = nodes[1:] - nodes[:-1]
    lens = np.sqrt(np.einsum("ij,ij->i", seg, seg))
    if lens.min() < DEGENERATE_SPACING:
        raise ArithmeticError("degenerate spacing before tridiagonal solve")
    b = lens
    a = np.empty_like(lens)
    a[0] = lens[-1]
    a[1:] = lens[:-1]
    cm = 2.0 / (a * (a + b))
    cp = 2.0 / (b * (a + b))
    m = len(p)
    diag = 1.0 + dt * (cm + cp)
    lower = -dt * cm   # coupling to i-1
    upper = -dt * cp   # coupling to i+1
    alpha = upper[-1]  # corner (m-1, 0)
    beta = lower[0]    # corner (0, m-1)
    gamma = -diag[0]
    ab = np.zeros((3, m))
    ab[1, :] = diag
    ab[1, 0] -= gamma
    ab[1, -1] -= alpha * beta / gamma
    ab[0, 1:] = upper[:-1]
    ab[2, :-1] = lower[1:]
    rhs = p.copy()
    if rhs_u is not None:
        rhs += dt * rhs_u
    cols = np.zeros((m, 3))
    cols[:, :2] = rhs
    cols[0, 2] = gamma
    cols[-1, 2] = alpha
    sol = solve_banded((1, 1), ab, cols, check_finite=False)
    if not np.all(np.isfinite(sol)):
        raise ArithmeticError("tridiagonal solve produced non-finite values")
    y = sol[:, :2]
    z = sol[:, 2]
    # v = e_0 + (beta/gamma) e_{m-1}
    factor = (y[0] + (beta / gamma) * y[-1]) / (1.0 + z[0] + (beta / gamma) * z[-1])
    pn = y - np.outer(z, factor)
    out = np.empty_like(nodes)
    out[:-1] = pn
    out[-1] = pn[0]
    return out


def _fermat_point(neighbors: np.ndarray, x0: np.ndarray) -> np.ndarray:
    """Point where the unit vectors toward the three neighbors sum to zero.

    Newton iteration from x0 with a Weiszfeld fallback; neighbors are assumed
    non-degenerate (the event detector halts the flow before they collapse).
    """
    x = x0.copy()
    for _ in range(30):
        rel = neighbors - x
        r = np.linalg.norm(rel, axis=1)
        if np.any(r < DEGENERATE_SPACING):
            return x
        u = rel / r[:, None]
        F = u.sum(axis=0)
        if F @ F < 1e-26:
            return x
        Jmat = np.einsum("ki,kj->ij", u, u * (1.0 / r)[:, None]) - np.eye(2) * (1.0 / r).sum()
        try:
            step = np.linalg.solve(Jmat, -F)
        except np.linalg.LinAlgError:
            step = None
        if step is None or not np.all(np.isfinite(step)) or np.linalg.norm(step) > r.min():
            # Weiszfeld step: robust, slower
            wsum = (1.0 / r).sum()
            x = (neighbors / r[:, None]).sum(axis=0) / wsum
            continue
        x = x + step
    return x


class _SimState:
    """Mutable arrays for the inner loop; materialized to Network on demand."""

    def __init__(self, net: Network):
        self.nodes = [c.nodes.copy() for c in net.curves]
        self.tags = [c.end_tags for c in net.curves]
        self.closed = [c.closed for c in net.curves]
        self.junctions = {k: v.copy() for k, v in net.junctions.items()}
        self.jrefs = net.junction_endpoints()
        self.clamped = [
            [end for end, tag in zip((0, -1), c.end_tags) if tag == TAG_CLAMPED]
            for c in net.curves
        ]

    def to_network(self) -> Network:
        curves = tuple(Curve(n.copy(), t) for n, t in zip(self.nodes, self.tags))
        return Network(curves, {k: v.copy() for k, v in self.junctions.items()})


def _junction_sweep(state: _SimState) -> None:
    for _ in range(2):
        for jid, endlist in state.jrefs.items():
            if len(endlist) != 3:
                continue
            nb = np.empty((3, 2))
            for k, (ci, end) in enumerate(endlist):
                arr = state.nodes[ci]
                nb[k] = arr[1] if end == 0 else arr[-2]
            pos = _fermat_point(nb, state.junctions[jid])
            state.junctions[jid] = pos
            for ci, end in endlist:
                state.nodes[ci][end] = pos


def _step_state(state: _SimState, forcing: ForcingField, t: float, dt: float) -> None:
    for ci, nodes in enumerate(state.nodes):
        closed = state.closed[ci]
        if len(nodes) < 3:
            continue
        if forcing.is_zero:
            rhs_u = None
        else:
            pts = nodes[:-1] if closed else nodes[1:-1]
            rhs_u = _u_perp(forcing(pts, t), nodes, closed)
        try:
            state.nodes[ci] = (_solve_closed if closed else _solve_open)(nodes, rhs_u, dt)
        except ArithmeticError as exc:
            raise ArithmeticError(f"step failed on curve {ci} at t={t}: {exc}") from exc
    _junction_sweep(state)


def step(net: Network, forcing: ForcingField, t: float, dt: float) -> Network:
    """One explicit-forcing, implicit-curvature step; junctions re-balanced after."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    state = _SimState(net)
    _step_state(state, forcing, t, dt)
    return state.to_network()


def regrid(curve: Curve, h_target: float) -> Curve:
    """Redistribute nodes uniformly by arclength when spacing leaves [h/2, 2h].

    New nodes lie on the old polyline, so the length never increases and the
    endpoints are preserved exactly.
    """
    lens = curve.segment_lengths()
    if len(lens) and lens.min() >= h_target / 2 and lens.max() <= 2 * h_target:
        return curve
    total = float(lens.sum())
    n_new = max(2, int(round(total / h_target)) + 1)
    if curve.closed:
        n_new = max(4, n_new)
    s_old = np.concatenate([[0.0], np.cumsum(lens)])
    s_new = np.linspace(0.0, total, n_new)
    x = np.interp(s_new, s_old, curve.nodes[:, 0])
    y = np.interp(s_new, s_old, curve.nodes[:, 1])
    nodes = np.stack([x, y], axis=1)
    nodes[0] = curve.nodes[0]
    nodes[-1] = curve.nodes[-1]
    return Curve(nodes, curve.end_tags)


def detect_events(net: Network, eps_len: float, eps_col: float) -> list[dict]:
    """Sub-resolution geometry reports: collapsing bridges, close junction pairs,
    vanishing loops."""
    events: list[dict] = []
    for ci, curve in enumerate(net.curves):
        length = curve.length()
        if curve.closed:
            if length < eps_len:
                events.append({"kind": "vanishing_loop", "data": {"curve": ci, "length": length}})
        else:
            jids = [tag_junction_id(tag) for tag in curve.end_tags]
            if all(j is not None for j in jids) and length < eps_len:
                events.append({"kind": "collision_precursor",
                               "data": {"curve": ci, "length": length, "junctions": jids}})
    jids = sorted(net.junctions)
    for i in range(len(jids)):
        for j in range(i + 1, len(jids)):
            a, b = net.junctions[jids[i]], net.junctions[jids[j]]
            d = float(np.linalg.norm(a - b))
            if d < eps_col:
                events.append({
                    "kind": "junction_collision",
                    "data": {"junctions": [jids[i], jids[j]],
                             "point": (0.5 * (a + b)).tolist(), "distance": d},
                })
    return events


def run(scenario: Scenario) -> FlowTrajectory:
    """Drive step/regrid/detect_events; halts at the first fatal event."""
    bad = validate(scenario.initial)
    if bad:
        raise ValueError(f"initial network invalid: {bad[0]}")
    state = _SimState(scenario.initial)
    forcing = scenario.forcing
    dt = scenario.dt
    n_steps = int(round((scenario.t_end - scenario.t_start) / dt))
    traj = FlowTrajectory(snapshots=[], forcing=forcing)
    h_lo = scenario.h_target / 2
    h_hi = 2 * scenario.h_target

    def snapshot(t: float):
        net = state.to_network()
        if scenario.validate_snapshots:
            viol = validate(net)
            if viol:
                raise RuntimeError(f"network invariant broken at t={t}: {viol[0]}")
        traj.snapshots.append((t, net))

    t = scenario.t_start
    for k in range(n_steps):
        if k % scenario.snapshot_stride == 0:
            snapshot(t)
        try:
            _step_state(state, forcing, t, dt)
        except ArithmeticError as exc:
            raise RuntimeError(f"{exc}") from exc
        t = scenario.t_start + (k + 1) * dt
        if scenario.clamp_motion is not None:
            for ci, ends in enumerate(state.clamped):
                for end in ends:
                    x = state.nodes[ci][end]
                    state.nodes[ci][end] = x + dt * np.asarray(
                        scenario.clamp_motion(x, t), dtype=float)
        hit_events = False
        for ci, nodes in enumerate(state.nodes):
            lens = np.linalg.norm(np.diff(nodes, axis=0), axis=1)
            if lens.min() < h_lo or lens.max() > h_hi:
                newc = regrid(Curve(nodes, state.tags[ci]), scenario.h_target)
                state.nodes[ci] = newc.nodes.copy()
                lens = newc.segment_lengths()
            if lens.sum() < scenario.eps_len and (
                    state.closed[ci] or all(
                        tag_junction_id(tg) is not None for tg in state.tags[ci])):
                hit_events = True
        if len(state.junctions) > 1 and not hit_events:
            jpos = np.array(list(state.junctions.values()))
            diffs = jpos[:, None, :] - jpos[None, :, :]
            gaps = np.linalg.norm(diffs, axis=2) + np.eye(len(jpos)) * 1e9
            if gaps.min() < scenario.eps_col:
                hit_events = True
        if hit_events:
            for ev in detect_events(state.to_network(), scenario.eps_len, scenario.eps_col):
                traj.events.append((t, ev))
            snapshot(t)
            return traj
    if not traj.snapshots or traj.snapshots[-1][0] < t - 1e-15:
        snapshot(t)
    return traj


def herring_residual(net: Network) -> float:
    """Worst junction imbalance: norm of the sum of unit tangents toward the
    first interior nodes."""
    worst = 0.0
    for jid, endlist in net.junction_endpoints().items():
        if len(endlist) != 3:
            continue
        pos = net.junctions[jid]
        s = np.zeros(2)
        for ci, end in endlist:
            arr = net.curves[ci].nodes
            nb = arr[1] if end == 0 else arr[-2]
            rel = nb - pos
            s += rel / np.linalg.norm(rel)
        worst = max(worst, float(np.linalg.norm(s)))
    return worst
