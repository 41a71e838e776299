"""Space-time L2 excess to fitted triple junctions and the quantitative
regularity diagnostics built on it: frame fitting, dyadic decay, junction
tracking with Holder estimation, curvature/shrinker energies, graph extraction
and the heat-equation residual of near-junction graphs.

Every quantity here is invariant under the parabolic change of variables; the
window-local computations run in window-normalized coordinates to make that
literal (and to make the derivative-free refinement scale-free).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .density import gaussian_density, parabolic_rescale, rho
from .flow import FlowTrajectory, ForcingField
from .geometry import (
    RAY_DIRS,
    Network,
    TriodFrame,
    canonical_angle,
    d_metric,
    dist_to_triod,
    rotation,
)
from .varifold import (
    CBOLD_TRIOD_MASS,
    clip_varifold,
    node_quadrature,
    phi_rad,
    to_varifold,
    weigh,
)

MU_NOISE_FLOOR = 1e-5
TRACK_FLOOR = 1e-12


@dataclass(frozen=True)
class Window:
    """Space-time window: ball B_{4R}(center) over times [s - 2R^2, s + 2R^2]."""

    center: np.ndarray
    s: float
    R: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        if c.shape != (2,) or self.R <= 0:
            raise ValueError("window needs a 2-vector center and R > 0")
        object.__setattr__(self, "center", c)

    @property
    def t_lo(self) -> float:
        return self.s - 2.0 * self.R ** 2

    @property
    def t_hi(self) -> float:
        return self.s + 2.0 * self.R ** 2

    def echo(self) -> str:
        return (f"window(center=({self.center[0]:g},{self.center[1]:g}), "
                f"s={self.s:g}, R={self.R:g})")


def check_window(traj: FlowTrajectory, w: Window) -> None:
    lo, hi = traj.time_range()
    if w.t_lo < lo - 1e-9 or w.t_hi > hi + 1e-9:
        raise ValueError(
            f"{w.echo()} needs times [{w.t_lo:g}, {w.t_hi:g}] outside the "
            f"trajectory range [{lo:g}, {hi:g}]")


def _window_snapshots(traj: FlowTrajectory, w: Window):
    """Snapshots inside the window with trapezoid time-weights covering the full
    window span (boundary samples extend to the window edges)."""
    snaps = [(t, net) for t, net in traj.snapshots if w.t_lo - 1e-12 <= t <= w.t_hi + 1e-12]
    if len(snaps) < 2:
        raise ValueError(f"no snapshot pair inside {w.echo()}")
    times = np.array([t for t, _ in snaps])
    wts = np.zeros(len(times))
    dts = np.diff(times)
    wts[:-1] += 0.5 * dts
    wts[1:] += 0.5 * dts
    wts[0] += max(0.0, times[0] - w.t_lo)
    wts[-1] += max(0.0, w.t_hi - times[-1])
    return snaps, times, wts


def _window_atoms(traj: FlowTrajectory, w: Window):
    """All clipped atoms in the window, with time-quadrature folded into weights."""
    snaps, _, wts = _window_snapshots(traj, w)
    mids, wt = [], []
    for (t, net), tw in zip(snaps, wts):
        V = to_varifold(net, clip=(w.center, 4.0 * w.R))
        if len(V.weights):
            mids.append(V.midpoints)
            wt.append(V.weights * tw)
    if not mids:
        return np.zeros((0, 2)), np.zeros(0)
    return np.concatenate(mids), np.concatenate(wt)


def l2_excess(traj: FlowTrajectory, w: Window, frame: TriodFrame) -> float:
    """Parabolically normalized space-time L2 distance of the flow to the frame."""
    check_window(traj, w)
    mids, wt = _window_atoms(traj, w)
    if len(wt) == 0:
        return 0.0
    d = dist_to_triod(mids, frame)
    return math.sqrt(float(np.dot(d * d, wt)) / w.R ** 5)


def u_norm(traj: FlowTrajectory, w: Window, forcing: ForcingField) -> float:
    """Scale-invariant space-time norm of the forcing over the window."""
    check_window(traj, w)
    if forcing.is_zero:
        return 0.0
    snaps, times, wts = _window_snapshots(traj, w)
    p, q = forcing.p, forcing.q
    inner = []
    for t, net in snaps:
        V = to_varifold(net, clip=(w.center, 4.0 * w.R))
        if len(V.weights) == 0:
            inner.append(0.0)
            continue
        u = forcing(V.midpoints, t)
        mag = np.linalg.norm(u, axis=1)
        inner.append(float(np.dot(mag ** p, V.weights)))
    inner = np.array(inner)
    total = float(np.dot(inner ** (q / p), wts))
    return w.R ** forcing.zeta * total ** (1.0 / q)


# ---------------------------------------------------------------------------
# frame fitting
# ---------------------------------------------------------------------------

def _coarse_scores(local: np.ndarray, wts: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Weighted sum of squared triod distances for every vertex offset.

    dist^2((x - o), J) = |x|^2 + |o|^2 - 2 x.o - max(x.d - o.d, 0)^2 minimized
    over the three rays d; the cross term is a single GEMM.
    """
    n2 = np.einsum("ij,ij->i", local, local)[:, None]
    o2 = np.einsum("kj,kj->k", offsets, offsets)[None, :]
    base = n2 + o2 - 2.0 * (local @ offsets.T)
    t_loc = local @ RAY_DIRS.T        # (m, 3)
    t_off = offsets @ RAY_DIRS.T      # (k, 3)
    best = None
    for j in range(3):
        t = t_loc[:, j, None] - t_off[None, :, j]
        np.clip(t, 0.0, None, out=t)
        np.multiply(t, t, out=t)
        d2 = base - t
        best = d2 if best is None else np.minimum(best, d2, out=best)
    return wts @ best


THETA_STEP = math.pi / 60.0
XI_STEP = 1.0 / 20.0          # in units of R
COARSE_ATOM_BUDGET = 250
REFINE_ATOM_BUDGET = 30000


def fit_frame(traj: FlowTrajectory, w: Window) -> tuple[TriodFrame, float]:
    """Excess-minimizing frame over theta in (-pi/3, pi/3], xi in B_R(center).

    Coarse grid (theta step pi/60, xi step R/20) followed by Nelder-Mead in
    window-normalized coordinates to 1e-6 tolerance in the excess.
    """
    check_window(traj, w)
    mids, wt = _window_atoms(traj, w)
    if len(wt) == 0 or wt.sum() <= 0:
        raise ValueError(f"{w.echo()} carries no mass")
    norm = w.R ** (-5)

    # coarse stage on a subsampled quadrature
    if len(wt) > COARSE_ATOM_BUDGET:
        stride = int(math.ceil(len(wt) / COARSE_ATOM_BUDGET))
        mids_c, wt_c = mids[::stride], wt[::stride]
    else:
        mids_c, wt_c = mids, wt
    n_th = 40
    thetas = -math.pi / 3.0 + THETA_STEP * np.arange(1, n_th + 1)
    grid = np.arange(-1.0, 1.0 + 1e-9, XI_STEP)
    gx, gy = np.meshgrid(grid, grid)
    eta = np.stack([gx.ravel(), gy.ravel()], axis=1)
    eta = eta[np.linalg.norm(eta, axis=1) <= 1.0 + 1e-12]
    best = (math.inf, 0.0, np.zeros(2))
    for th in thetas:
        rot = rotation(th)
        local = (mids_c - w.center) @ rot
        offs = (w.R * eta) @ rot
        vals = _coarse_scores(local, wt_c, offs)
        k = int(np.argmin(vals))
        if vals[k] < best[0]:
            best = (float(vals[k]), float(th), eta[k].copy())

    # scale-free refinement in (theta, xi/R) on a capped quadrature
    if len(wt) > REFINE_ATOM_BUDGET:
        stride = int(math.ceil(len(wt) / REFINE_ATOM_BUDGET))
        rel, wt_r = (mids[::stride] - w.center), wt[::stride]
    else:
        rel, wt_r = mids - w.center, wt

    def objective(z):
        th, ex, ey = z
        local = (rel - w.R * np.array([ex, ey])) @ rotation(th)
        n2 = np.einsum("ij,ij->i", local, local)
        t = local @ RAY_DIRS.T
        np.clip(t, 0.0, None, out=t)
        d2 = n2 - (t * t).max(axis=1)
        mu = math.sqrt(max(float(np.dot(d2, wt_r)), 0.0) * norm)
        over = max(0.0, math.hypot(ex, ey) - 1.0)
        return mu + 10.0 * over * over

    x0 = np.array([best[1], best[2][0], best[2][1]])
    res = minimize(objective, x0, method="Nelder-Mead",
                   options={"xatol": 1e-7, "fatol": 1e-9,
                            "maxiter": 400, "maxfev": 600})
    th, ex, ey = res.x
    eta_n = math.hypot(ex, ey)
    if eta_n > 1.0:
        ex, ey = ex / eta_n, ey / eta_n
    refined = TriodFrame(canonical_angle(float(th)), w.center + w.R * np.array([ex, ey]))
    coarse = TriodFrame(canonical_angle(best[1]), w.center + w.R * best[2])
    # report full-quadrature excess; never worse than the coarse grid minimum
    cands = [(l2_excess(traj, w, fr), fr) for fr in (refined, coarse)]
    cands.sort(key=lambda p: p[0])
    return cands[0][1], cands[0][0]


@dataclass(frozen=True)
class DecayPoint:
    scale: float
    frame: TriodFrame
    mu: float
    drift: float     # d_{scale}(frame, frame at the largest scale)


@dataclass(frozen=True)
class DecayProfile:
    points: tuple[DecayPoint, ...]
    exponent: float | None    # least-squares slope of log mu vs log scale
    at_noise_floor: bool      # True when the residuals sit at the fit floor


def decay_profile(traj: FlowTrajectory, center, scales) -> DecayProfile:
    """Fit the excess-minimizing frame at a ladder of scales about one space-time
    point and fit the decay exponent of the excess."""
    scales = [float(s) for s in scales]
    if len(scales) < 3:
        raise ValueError("need at least 3 scales")
    for a, b in zip(scales, scales[1:]):
        if b > a / 2.0 + 1e-12:
            raise ValueError("consecutive scales must decrease by a ratio <= 1/2")
    y = np.asarray(center[0], dtype=float)
    s = float(center[1])
    points = []
    for sk in scales:
        w = Window(y, s, sk)
        frame, mu = fit_frame(traj, w)
        points.append((sk, frame, mu))
    frame0 = points[0][1]
    out = tuple(DecayPoint(sk, fr, mu, d_metric(fr, frame0, R=sk))
                for sk, fr, mu in points)
    usable = [(sk, mu) for sk, _, mu in points if mu > MU_NOISE_FLOOR]
    if len(usable) < 2:
        return DecayProfile(out, None, True)
    ls = np.log([sk for sk, _ in usable])
    lm = np.log([mu for _, mu in usable])
    slope = float(np.polyfit(ls, lm, 1)[0])
    return DecayProfile(out, slope, False)


# ---------------------------------------------------------------------------
# junction tracking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrackRegion:
    center: np.ndarray | None = None
    radius: float | None = None
    t_min: float | None = None
    t_max: float | None = None

    def contains_time(self, t: float) -> bool:
        if self.t_min is not None and t < self.t_min - 1e-12:
            return False
        if self.t_max is not None and t > self.t_max + 1e-12:
            return False
        return True

    def contains_point(self, p: np.ndarray) -> bool:
        if self.center is None or self.radius is None:
            return True
        return bool(np.linalg.norm(p - np.asarray(self.center, float)) <= self.radius)


@dataclass(frozen=True)
class JunctionTrack:
    times: np.ndarray
    positions: np.ndarray      # (n, 2); undefined rows where gap
    gaps: np.ndarray           # bool

    def __post_init__(self):
        if not (len(self.times) == len(self.positions) == len(self.gaps)):
            raise ValueError("track arrays must share a length")
        good = ~self.gaps
        if good.any() and not np.all(np.isfinite(self.positions[good])):
            raise ValueError("non-gap positions must be finite")

    def valid(self):
        good = ~self.gaps
        return self.times[good], self.positions[good]


def _density_argmax(traj, net: Network, t: float, region: TrackRegion,
                    tau: float, grid_n: int = 21) -> np.ndarray | None:
    """Fallback junction locator: grid argmax of the Gaussian density."""
    c = np.asarray(region.center if region.center is not None else (0.0, 0.0), float)
    r = region.radius if region.radius is not None else 1.0
    xs = np.linspace(c[0] - r, c[0] + r, grid_n)
    ys = np.linspace(c[1] - r, c[1] + r, grid_n)
    V = to_varifold(net)
    if len(V.weights) == 0:
        return None
    gx, gy = np.meshgrid(xs, ys)
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    d2 = np.sum((pts[:, None, :] - V.midpoints[None, :, :]) ** 2, axis=2)
    kern = np.exp(-d2 / (4.0 * tau)) / math.sqrt(4.0 * math.pi * tau)
    dens = kern @ V.weights
    k = int(np.argmax(dens))
    if dens[k] < 1.25:
        return None
    return pts[k]


def track_junctions(traj: FlowTrajectory, region: TrackRegion | None = None,
                    tau: float | None = None) -> JunctionTrack:
    """Junction position per snapshot: the junction table when present, else the
    density-argmax fallback; gap where neither identifies a junction."""
    region = region or TrackRegion()
    times, pos, gaps = [], [], []
    prev = None
    for t, net in traj.snapshots:
        if not region.contains_time(t):
            continue
        found = None
        if net.junctions:
            cands = [p for p in net.junctions.values() if region.contains_point(p)]
            if cands:
                if prev is None:
                    anchor = np.asarray(
                        region.center if region.center is not None else cands[0], float)
                else:
                    anchor = prev
                found = min(cands, key=lambda p: float(np.linalg.norm(p - anchor)))
        else:
            tau_eff = tau if tau is not None else max(4.0 * traj.median_gap(), 1e-4)
            found = _density_argmax(traj, net, t, region, tau_eff)
        times.append(t)
        if found is None:
            pos.append(np.array([math.nan, math.nan]))
            gaps.append(True)
        else:
            pos.append(np.asarray(found, float))
            gaps.append(False)
            prev = pos[-1]
    return JunctionTrack(np.array(times), np.array(pos).reshape(-1, 2), np.array(gaps, dtype=bool))


@dataclass(frozen=True)
class HolderFit:
    exponent: float
    constant: float
    n_pairs: int
    n_below_floor: int
    infinite_regularity: bool = False


def holder_exponent(track: JunctionTrack, t_min_gap: float) -> HolderFit:
    """Least-squares Holder fit log|da| ~ alpha log|dt| over well-separated pairs."""
    ts, ps = track.valid()
    if len(ts) < 10:
        raise ValueError(f"need >= 10 non-gap samples, have {len(ts)}")
    ii, jj = np.triu_indices(len(ts), k=1)
    dt = ts[jj] - ts[ii]
    keep = dt >= t_min_gap
    ii, jj, dt = ii[keep], jj[keep], dt[keep]
    da = np.linalg.norm(ps[jj] - ps[ii], axis=1)
    below = da <= TRACK_FLOOR
    n_below = int(below.sum())
    da, dt = da[~below], dt[~below]
    if len(da) == 0:
        return HolderFit(math.inf, 0.0, 0, n_below, infinite_regularity=True)
    if len(da) < 3:
        raise ValueError("too few valid pairs above the displacement floor")
    slope, intercept = np.polyfit(np.log(dt), np.log(da), 1)
    return HolderFit(float(slope), float(math.exp(intercept)), len(da), n_below)


# ---------------------------------------------------------------------------
# window-normalized energies
# ---------------------------------------------------------------------------

def _normalized(traj: FlowTrajectory, w: Window) -> FlowTrajectory:
    check_window(traj, w)
    return parabolic_rescale(traj, (w.center, w.s), w.R)


def _interior_snapshots(zoom: FlowTrajectory):
    snaps = [(t, net) for t, net in zoom.snapshots if -1.0 - 1e-9 <= t <= 1.0 + 1e-9]
    if len(snaps) < 2:
        raise ValueError("window too small: no interior snapshot pair")
    return snaps


def curvature_energy(traj: FlowTrajectory, w: Window) -> tuple[float, float]:
    """Mass defect sup and space-time curvature energy at window scale.

    Returns (sup over interior snapshots of | ||V||(phi_rad^2) - c |,
    integral of |h|^2 phi_rad^2 over the interior window), both in
    window-normalized coordinates.
    """
    zoom = _normalized(traj, w)
    prad = phi_rad()
    phi2 = lambda x: prad.value(x) ** 2
    snaps = _interior_snapshots(zoom)
    defects, energies, times = [], [], []
    for t, net in snaps:
        defects.append(abs(weigh(to_varifold(net, clip=(np.zeros(2), 2.0)), phi2)
                           - CBOLD_TRIOD_MASS))
        pos, curv, _, wts = node_quadrature(net)
        if len(wts):
            vals = phi2(pos)
            energies.append(float(np.dot(np.einsum("ij,ij->i", curv, curv) * vals, wts)))
        else:
            energies.append(0.0)
        times.append(t)
    energy = float(np.trapezoid(energies, times))
    return float(max(defects)), energy


def shrinker_energy(traj: FlowTrajectory, t0: float, w: Window) -> float:
    """Kernel-weighted self-shrinker deviation integral about (w.center, t0)."""
    zoom = _normalized(traj, w)
    t0n = (t0 - w.s) / w.R ** 2
    gap = zoom.median_gap()
    snaps = [(t, net) for t, net in zoom.snapshots
             if -2.0 - 1e-9 <= t <= min(2.0, t0n - gap) + 1e-9]
    if len(snaps) < 2:
        raise ValueError("window times must end before t0 with at least two snapshots")
    vals, times = [], []
    for t, net in snaps:
        pos, curv, tang, wts = node_quadrature(net)
        if len(wts) == 0:
            vals.append(0.0)
            times.append(t)
            continue
        inside = np.einsum("ij,ij->i", pos, pos) <= 1.0
        if not inside.any():
            vals.append(0.0)
            times.append(t)
            continue
        p, h, tg, ww = pos[inside], curv[inside], tang[inside], wts[inside]
        x_perp = p - np.einsum("ij,ij->i", p, tg)[:, None] * tg
        dev = h + x_perp / (2.0 * (t0n - t))
        kern = rho(np.zeros(2), t0n, p, t)
        vals.append(float(np.dot(np.einsum("ij,ij->i", dev, dev) * kern, ww)))
        times.append(t)
    return float(np.trapezoid(vals, times))


def weighted_noncon(traj: FlowTrajectory, t0: float, w: Window,
                    kappa: float, frame: TriodFrame) -> float:
    """sup over snapshots of (t0-t)^(-kappa) * kernel-weighted squared distance
    to the frame, within B_{3/4} of the window center (normalized)."""
    if not 0.0 <= kappa < 1.0:
        raise ValueError("kappa must lie in [0, 1)")
    zoom = _normalized(traj, w)
    t0n = (t0 - w.s) / w.R ** 2
    gap = zoom.median_gap()
    frame_n = TriodFrame(frame.theta, (frame.xi - w.center) / w.R)
    snaps = [(t, net) for t, net in zoom.snapshots
             if -2.0 - 1e-9 <= t <= min(2.0, t0n - gap) + 1e-9]
    if not snaps:
        raise ValueError("window times must end before t0")
    best = 0.0
    for t, net in snaps:
        V = to_varifold(net, clip=(np.zeros(2), 0.75))
        if len(V.weights) == 0:
            continue
        d = dist_to_triod(V.midpoints, frame_n)
        kern = rho(np.zeros(2), t0n, V.midpoints, t)
        val = (t0n - t) ** (-kappa) * float(np.dot(d * d * kern, V.weights))
        best = max(best, val)
    return best


# ---------------------------------------------------------------------------
# graph extraction and the heat residual
# ---------------------------------------------------------------------------

def graph_extract(net: Network, frame: TriodFrame, j: int, interval,
                  samples: int) -> np.ndarray | None:
    """Samples (x, f_j(x)) of the flow as a graph over ray j of the frame.

    None when the support is absent or multi-valued over the interval (the
    window is then outside the graph regime).  Heights beyond 1/2 are ignored.
    """
    if j not in (1, 2, 3):
        raise ValueError("ray index must be 1, 2 or 3")
    a, b = float(interval[0]), float(interval[1])
    if not 0.0 < a < b:
        raise ValueError("interval must satisfy 0 < a < b")
    rot = rotation(frame.theta) @ rotation(2.0 * math.pi * (j - 1) / 3.0)
    xs = np.linspace(a, b, samples)
    out = np.empty(samples)
    counts = np.zeros(samples, dtype=int)
    for curve in net.curves:
        local = (curve.nodes - frame.xi) @ rot
        x0, x1 = local[:-1, 0], local[1:, 0]
        y0, y1 = local[:-1, 1], local[1:, 1]
        for k, x in enumerate(xs):
            hit = ((x0 - x) * (x1 - x) <= 0.0) & (np.abs(x1 - x0) > 1e-15)
            if not hit.any():
                continue
            tpar = (x - x0[hit]) / (x1[hit] - x0[hit])
            ys = y0[hit] + tpar * (y1[hit] - y0[hit])
            ys = ys[np.abs(ys) <= 0.5]
            ys = np.unique(np.round(ys, 12))
            if len(ys) == 0:
                continue
            if len(ys) > 1 or counts[k] >= 1:
                return None     # multi-valued
            out[k] = ys[0]
            counts[k] = 1
    if not counts.all():
        return None             # absent somewhere on the interval
    return np.stack([xs, out], axis=1)


def heat_residual(traj: FlowTrajectory, frame: TriodFrame, j: int, interval,
                  w: Window, samples: int | None = None) -> float:
    """L2 norm of (df/dt - d2f/dx2) of the extracted graph over the window,
    normalized by the window's excess to the frame."""
    check_window(traj, w)
    a, b = float(interval[0]), float(interval[1])
    if samples is None:
        samples = 21   # relative grid: the residual is then parabolically invariant
    snaps = [(t, net) for t, net in traj.snapshots if w.t_lo - 1e-12 <= t <= w.t_hi + 1e-12]
    if len(snaps) < 3:
        raise ValueError("need at least 3 snapshots in the window")
    F = []
    for t, net in snaps:
        g = graph_extract(net, frame, j, (a, b), samples)
        if g is None:
            raise ValueError(f"graph extraction failed at t={t}")
        F.append(g[:, 1])
    F = np.array(F)
    times = np.array([t for t, _ in snaps])
    dx = (b - a) / (samples - 1)
    dfdt = (F[2:, 1:-1] - F[:-2, 1:-1]) / (times[2:] - times[:-2])[:, None]
    d2fdx2 = (F[1:-1, 2:] - 2.0 * F[1:-1, 1:-1] + F[1:-1, :-2]) / dx ** 2
    res = dfdt - d2fdx2
    dt_w = 0.5 * (times[2:] - times[:-2])
    # R-normalized like the excess itself, so the ratio is parabolically invariant
    raw = math.sqrt(float(np.einsum("ki,k->", res * res, dt_w)) * dx / w.R)
    mu = l2_excess(traj, w, frame)
    if raw == 0.0:
        return 0.0
    return raw / max(mu, 1e-15)


def two_triod_gap(frame1: TriodFrame, frame2: TriodFrame,
                  n_radial: int = 24, n_side: int = 17) -> float:
    """Sampled minimum of [dist(x, J1) + dist(x, J2)] / |xi| over the component
    of the complement of the equidistance set where the bound is sharp.

    The two frames must differ by a translation only; the contract is
    result >= sqrt(3)/2 up to the grid tolerance.
    """
    if abs(frame1.theta - frame2.theta) > 1e-12:
        raise ValueError("frames must share the rotation angle")
    xi_world = frame2.xi - frame1.xi
    norm = float(np.linalg.norm(xi_world))
    if norm == 0.0:
        raise ValueError("frames must differ by a nonzero translation")
    xi = rotation(frame1.theta).T @ xi_world   # into frame1 coordinates
    # pick the ray against which xi has the largest normal component
    u = xi / norm
    sines = np.abs(u[0] * RAY_DIRS[:, 1] - u[1] * RAY_DIRS[:, 0])
    j = int(np.argmax(sines))
    d = RAY_DIRS[j]
    n = np.array([-d[1], d[0]])
    t_vals = norm * np.linspace(2.0, 40.0, n_radial)
    pts = []
    for t in t_vals:
        half = t * math.tan(math.pi / 3.0 - 0.05)
        for sshift in np.linspace(-half, half, n_side):
            pts.append(t * d + sshift * n)
    pts = np.asarray(pts)
    # stay on the component: away from the equidistance set R_{pi/3}(J)
    sep_frame = TriodFrame(math.pi / 3.0)
    pts = pts[dist_to_triod(pts, sep_frame) > norm]
    # and where ray j is genuinely the closest
    tproj = np.clip(pts @ RAY_DIRS.T, 0.0, None)
    d2 = np.einsum("ij,ij->i", pts, pts)[:, None] - tproj ** 2
    pts = pts[np.argmin(d2, axis=1) == j]
    if len(pts) == 0:
        raise ValueError("sampling produced no component points")
    world = pts @ rotation(frame1.theta).T + frame1.xi
    total = dist_to_triod(world, frame1) + dist_to_triod(world, frame2)
    return float(total.min() / norm)
