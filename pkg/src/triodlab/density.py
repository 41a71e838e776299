"""Backwards heat kernels, Gaussian densities, parabolic rescaling and
tangent-flow classification.

The density of a flow at a space-time point is estimated by Gaussian-weighted
mass at a ladder of kernel scales tau and Richardson-extrapolated to tau -> 0;
1 flags a regular point, 3/2 a triple junction, and >= 2 a genuine singularity
outside the regular regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .flow import FlowTrajectory
from .geometry import Curve, Network
from .varifold import to_varifold, weigh

TRUNCATION_FACTOR = 6.0   # kernel tail beyond 6*sqrt(tau) is < 3e-5 of the mass


def rho(y: np.ndarray, s: float, x: np.ndarray, t: float) -> np.ndarray | float:
    """1-d backwards heat kernel with pole (y, s), evaluated at (x, t), t < s."""
    if t >= s:
        raise ValueError(f"kernel needs t < s, got t={t}, s={s}")
    y = np.asarray(y, dtype=float)
    xs = np.asarray(x, dtype=float)
    single = xs.ndim == 1
    xs = np.atleast_2d(xs)
    tau = s - t
    d2 = np.einsum("ij,ij->i", xs - y, xs - y)
    vals = np.exp(-d2 / (4.0 * tau)) / math.sqrt(4.0 * math.pi * tau)
    return float(vals[0]) if single else vals


def gaussian_density(traj: FlowTrajectory, y: np.ndarray, s: float, tau: float,
                     R_trunc: float | None = None) -> float:
    """Gaussian-weighted mass of the snapshot at s - tau about the pole (y, s)."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    gap = traj.median_gap()
    if gap > 0 and tau < 2.0 * gap * (1.0 - 1e-9):
        raise ValueError(
            f"tau={tau} under-resolves the snapshot spacing {gap} (need tau >= 2*gap)")
    t = s - tau
    lo, hi = traj.time_range()
    if not (lo - 1e-12 <= t <= hi + 1e-12):
        raise ValueError(f"time {t} outside the trajectory range [{lo}, {hi}]")
    if R_trunc is None:
        R_trunc = TRUNCATION_FACTOR * math.sqrt(tau)
    elif R_trunc < TRUNCATION_FACTOR * math.sqrt(tau):
        raise ValueError(f"R_trunc={R_trunc} below the {TRUNCATION_FACTOR}*sqrt(tau) floor")
    y = np.asarray(y, dtype=float)
    net = traj.network_at(t)
    V = to_varifold(net, clip=(y, R_trunc))
    return weigh(V, lambda pts: rho(y, s, pts, t))


@dataclass(frozen=True)
class DensityProfile:
    center: tuple[float, float, float]      # (y_x, y_y, s)
    taus: tuple[float, ...]                 # strictly decreasing
    values: tuple[float, ...]
    extrapolated: float
    monotone: bool                          # non-increasing as tau decreases (u=0 check)

    def __post_init__(self):
        if any(b >= a for a, b in zip(self.taus, self.taus[1:])):
            raise ValueError("tau ladder must be strictly decreasing")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("density values must be finite")


def density_limit(traj: FlowTrajectory, y: np.ndarray, s: float,
                  taus) -> DensityProfile:
    """Density ladder plus Richardson extrapolation of its last two rungs."""
    taus = [float(t) for t in taus]
    if len(taus) < 3:
        raise ValueError("need at least 3 tau values")
    vals = [gaussian_density(traj, y, s, tau) for tau in taus]
    # first-order extrapolation with the ladder's final ratio
    r = taus[-2] / taus[-1]
    extrap = (r * vals[-1] - vals[-2]) / (r - 1.0)
    monotone = all(vals[i] >= vals[i + 1] - 1e-3 for i in range(len(vals) - 1))
    y = np.asarray(y, dtype=float)
    return DensityProfile((float(y[0]), float(y[1]), float(s)),
                          tuple(taus), tuple(vals), float(extrap), monotone)


def parabolic_rescale(traj: FlowTrajectory, center: tuple[np.ndarray, float],
                      lam: float) -> FlowTrajectory:
    """Zoom (x, t) -> ((x - y)/lam, (t - s)/lam^2); masses scale by 1/lam via geometry."""
    if lam <= 0:
        raise ValueError("rescale factor must be positive")
    y, s = np.asarray(center[0], dtype=float), float(center[1])
    inv = 1.0 / lam
    snaps = []
    for t, net in traj.snapshots:
        curves = tuple(Curve((c.nodes - y) * inv, c.end_tags) for c in net.curves)
        junctions = {k: (v - y) * inv for k, v in net.junctions.items()}
        snaps.append(((t - s) * inv * inv, Network(curves, junctions)))
    if not snaps:
        raise ValueError("empty rescaled window")
    events = [((t - s) * inv * inv, ev) for t, ev in traj.events]
    return FlowTrajectory(snaps, traj.forcing.rescaled(y, s, lam), events)


KIND_EMPTY = "empty"
KIND_STATIC_LINE = "static_line"
KIND_STATIC_TRIPLE = "static_triple_junction"
KIND_STATIC_GE2 = "static_density_ge2"
KIND_QUASI_STATIC = "quasi_static"
KIND_SHRINKING = "shrinking"
KIND_UNRESOLVED = "unresolved"

DENSITY_TOL = 0.1  # static_density_ge2 threshold slack


@dataclass(frozen=True)
class TangentLabel:
    kind: str
    theta_star: float
    static_score: float
    spine_dim_estimate: int
    profile: DensityProfile | None = None
    density_after: float | None = None

    def __post_init__(self):
        if self.kind == KIND_STATIC_TRIPLE and not 1.4 <= self.theta_star <= 1.6:
            raise ValueError("triple-junction label requires theta_star in [1.4, 1.6]")
        if self.kind == KIND_STATIC_GE2 and self.theta_star < 2.0 - DENSITY_TOL:
            raise ValueError("density>=2 label requires theta_star >= 2 - tol")
        if not 0.0 <= self.static_score <= 1.0:
            raise ValueError("static score must lie in [0, 1]")


@dataclass(frozen=True)
class TangentConfig:
    tau0: float = 0.08              # top of the tau ladder {tau0, tau0/2, tau0/4}
    lambda_scale: float = 0.3       # zoom used for the staticity comparison
    static_hausdorff: float = 0.05  # rescaled-support distance declaring static
    spine_radius: float = 0.35      # probe radius for the spine estimate
    spine_tol: float = 0.12
    density_tol: float = 0.1
    support_limit: float = 1.0      # points sampled inside B_1 after rescaling


def _support_points(net: Network, limit: float, max_gap: float = 0.02) -> np.ndarray:
    """Dense sample of the support inside B_limit (nodes plus split segments)."""
    chunks = []
    for curve in net.curves:
        a, b = curve.nodes[:-1], curve.nodes[1:]
        lens = np.linalg.norm(b - a, axis=1)
        n_sub = np.maximum(1, np.ceil(lens / max_gap).astype(int))
        for i in range(len(a)):
            ts = np.linspace(0.0, 1.0, n_sub[i] + 1)
            chunks.append(a[i] + ts[:, None] * (b[i] - a[i]))
    if not chunks:
        return np.zeros((0, 2))
    pts = np.concatenate(chunks)
    return pts[np.linalg.norm(pts, axis=1) <= limit]


def _hausdorff(A: np.ndarray, B: np.ndarray) -> float:
    if len(A) == 0 and len(B) == 0:
        return 0.0
    if len(A) == 0 or len(B) == 0:
        return math.inf
    d2 = np.sum((A[:, None, :] - B[None, :, :]) ** 2, axis=2)
    return float(max(np.sqrt(d2.min(axis=1)).max(), np.sqrt(d2.min(axis=0)).max()))


def _static_score(traj: FlowTrajectory, center, cfg: TangentConfig) -> float:
    """1 for frozen rescaled supports, 0 for fast motion; static means >= 0.5."""
    zoom = parabolic_rescale(traj, center, cfg.lambda_scale)
    lo, _ = zoom.time_range()
    if lo > -1.0:
        raise ValueError("window too small for the staticity comparison")
    early = _support_points(zoom.network_at(-1.0), cfg.support_limit)
    late = _support_points(zoom.network_at(-0.25), cfg.support_limit)
    d = _hausdorff(early, late)
    if not math.isfinite(d):
        return 0.0
    return float(max(0.0, 1.0 - d / (2.0 * cfg.static_hausdorff)))


def _spine_dim(traj: FlowTrajectory, y, s, theta_star, cfg: TangentConfig) -> int:
    """Count probe directions carrying the center's density: 0 -> point spine,
    a antipodal pair -> line, many -> plane."""
    tau = cfg.tau0 / 2.0
    r = cfg.spine_radius * math.sqrt(max(cfg.tau0, 1e-12)) / math.sqrt(0.08)
    dirs = np.stack([np.cos(np.arange(8) * math.pi / 4), np.sin(np.arange(8) * math.pi / 4)], axis=1)
    hits = 0
    for d in dirs:
        val = gaussian_density(traj, np.asarray(y) + r * d, s, tau)
        if val >= theta_star - cfg.spine_tol:
            hits += 1
    if hits >= 5:
        return 2
    if hits >= 1:
        return 1
    return 0


def classify_tangent(traj: FlowTrajectory, center, cfg: TangentConfig | None = None) -> TangentLabel:
    """Label the tangent-flow type at a space-time point from density, staticity
    and spine-dimension estimates."""
    cfg = cfg or TangentConfig()
    y = np.asarray(center[0], dtype=float)
    s = float(center[1])
    taus = (cfg.tau0, cfg.tau0 / 2.0, cfg.tau0 / 4.0)
    profile = density_limit(traj, y, s, taus)
    theta_star = profile.extrapolated

    lo, hi = traj.time_range()
    density_after = None
    gap = traj.median_gap()
    if hi > s + 2.0 * gap:
        tau_a = min(max(cfg.tau0 / 4.0, 2.002 * gap), (hi - s) / 2.0)
        if gap > 0 and tau_a >= 2.0 * gap * (1.0 - 1e-9):
            density_after = gaussian_density(traj, y, s + 2.0 * tau_a, tau_a)

    if theta_star < 0.5:
        return TangentLabel(KIND_EMPTY, theta_star, 1.0, 0, profile, density_after)

    score = _static_score(traj, (y, s), cfg)
    static = score >= 0.5
    spine = _spine_dim(traj, y, s, theta_star, cfg)

    # the drop across s separates quasi-static from static regardless of how
    # frozen the pre-s supports look
    if density_after is not None and density_after < 0.5 * theta_star and spine == 1:
        return TangentLabel(KIND_QUASI_STATIC, theta_star, score, spine, profile, density_after)

    if static:
        if theta_star < 1.25:
            return TangentLabel(KIND_STATIC_LINE, theta_star, score, spine, profile, density_after)
        if 1.4 <= theta_star <= 1.6:
            return TangentLabel(KIND_STATIC_TRIPLE, theta_star, score, spine, profile, density_after)
        if theta_star >= 2.0 - DENSITY_TOL:
            return TangentLabel(KIND_STATIC_GE2, theta_star, score, spine, profile, density_after)
        return TangentLabel(KIND_UNRESOLVED, theta_star, score, spine, profile, density_after)

    if theta_star >= 0.75:
        return TangentLabel(KIND_SHRINKING, theta_star, score, spine, profile, density_after)
    return TangentLabel(KIND_UNRESOLVED, theta_star, score, spine, profile, density_after)


@dataclass(frozen=True)
class StratumPoint:
    y: tuple[float, float]
    s: float
    label: TangentLabel
    dimension: int          # 2 + spine dim for static labels, spine dim otherwise


def stratum_dimension(label: TangentLabel) -> int:
    if label.kind in (KIND_STATIC_LINE, KIND_STATIC_TRIPLE, KIND_STATIC_GE2):
        return 2 + label.spine_dim_estimate
    return label.spine_dim_estimate


def stratify(traj: FlowTrajectory, grid_points, cfg: TangentConfig | None = None,
             density_threshold: float = 1.05) -> list[StratumPoint]:
    """Classify every grid point whose extrapolated density exceeds the regular
    value; regular and empty points are omitted."""
    cfg = cfg or TangentConfig()
    out = []
    for (y, s) in grid_points:
        y = np.asarray(y, dtype=float)
        taus = (cfg.tau0, cfg.tau0 / 2.0, cfg.tau0 / 4.0)
        try:
            profile = density_limit(traj, y, float(s), taus)
        except ValueError:
            continue
        if profile.extrapolated < density_threshold:
            continue
        label = classify_tangent(traj, (y, float(s)), cfg)
        out.append(StratumPoint((float(y[0]), float(y[1])), float(s),
                                label, stratum_dimension(label)))
    return out


def spacetime_grid(x_range, y_range, t_range, nx: int, ny: int, nt: int):
    """Regular classification grid as a list of ((x, y), t) points."""
    xs = np.linspace(*x_range, nx)
    ys = np.linspace(*y_range, ny)
    ts = np.linspace(*t_range, nt)
    return [((x, y), t) for t in ts for y in ys for x in xs]
