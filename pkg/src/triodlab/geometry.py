"""Planar networks, the standard triple junction and its similarity class.

Coordinates are plain ``(2,)`` / ``(n, 2)`` float arrays.  A triple junction
template is three half-lines from a common point at mutual 120 degree angles;
``TriodFrame`` parametrizes its rotations and translations, which is the
comparison family used by every excess computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

COINCIDE_TOL = 1e-12

# Unit directions of the three template rays (120 degrees apart).
RAY_DIRS = np.array([
    [1.0, 0.0],
    [-0.5, 0.5 * math.sqrt(3.0)],
    [-0.5, -0.5 * math.sqrt(3.0)],
])

TAG_FREE = "free"
TAG_CLAMPED = "clamped"


def junction_tag(junction_id: str) -> str:
    return f"junction:{junction_id}"


def tag_junction_id(tag: str) -> str | None:
    """Junction id carried by an end tag, or None for free/clamped."""
    if tag.startswith("junction:"):
        return tag.split(":", 1)[1]
    return None


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def canonical_angle(theta: float) -> float:
    """Reduce an angle modulo the triod's 2*pi/3 symmetry into (-pi/3, pi/3]."""
    period = 2.0 * math.pi / 3.0
    t = math.fmod(theta, period)
    if t > period / 2.0:
        t -= period
    elif t <= -period / 2.0:
        t += period
    return t


@dataclass(frozen=True)
class TriodFrame:
    """An element R_theta(J) + xi of the triod similarity class.

    theta is stored canonically in (-pi/3, pi/3]; the template has 2*pi/3
    rotational symmetry so angles are only meaningful modulo that period.
    """

    theta: float = 0.0
    xi: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        if xi.shape != (2,) or not np.all(np.isfinite(xi)):
            raise ValueError(f"junction location must be a finite 2-vector, got {self.xi!r}")
        if not math.isfinite(self.theta):
            raise ValueError("frame angle must be finite")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "theta", canonical_angle(float(self.theta)))

    def ray_directions(self) -> np.ndarray:
        """(3, 2) unit directions of the rotated rays."""
        return RAY_DIRS @ rotation(self.theta).T

    def to_local(self, points: np.ndarray) -> np.ndarray:
        """Map points into the frame where the triod is the standard template."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return (p - self.xi) @ rotation(self.theta)  # R_{-theta} acting on rows


IDENTITY_FRAME = TriodFrame()


@dataclass(frozen=True)
class Curve:
    """Open or closed polyline; end tags are 'free', 'clamped' or 'junction:<id>'.

    A curve whose first and last nodes coincide (within 1e-12) is closed; its
    end tags are then both 'free' and ignored.
    """

    nodes: np.ndarray
    end_tags: tuple[str, str] = (TAG_FREE, TAG_FREE)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 2 or nodes.shape[0] < 2:
            raise ValueError("curve needs an (n>=2, 2) node array")
        if not np.all(np.isfinite(nodes)):
            raise ValueError("curve nodes must be finite")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "end_tags", (str(self.end_tags[0]), str(self.end_tags[1])))

    @property
    def closed(self) -> bool:
        return bool(np.linalg.norm(self.nodes[0] - self.nodes[-1]) <= COINCIDE_TOL)

    def segment_lengths(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.nodes, axis=0), axis=1)

    def length(self) -> float:
        return float(self.segment_lengths().sum())


@dataclass(frozen=True)
class Network:
    """Curves plus a junction table; the discrete carrier of the flow's support."""

    curves: tuple[Curve, ...]
    junctions: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "curves", tuple(self.curves))
        object.__setattr__(
            self, "junctions",
            {str(k): np.asarray(v, dtype=float) for k, v in self.junctions.items()},
        )

    def total_length(self) -> float:
        return float(sum(c.length() for c in self.curves))

    def junction_endpoints(self) -> dict[str, list[tuple[int, int]]]:
        """Map junction id -> list of (curve index, end index 0|-1) referencing it."""
        refs: dict[str, list[tuple[int, int]]] = {jid: [] for jid in self.junctions}
        for ci, curve in enumerate(self.curves):
            for end, tag in zip((0, -1), curve.end_tags):
                jid = tag_junction_id(tag)
                if jid is not None:
                    refs.setdefault(jid, []).append((ci, end))
        return refs


@dataclass(frozen=True)
class Violation:
    kind: str
    where: str
    detail: str


def standard_triod(frame: TriodFrame, extent: float, h: float) -> Network:
    """Three polyline rays of the given length from the frame's junction.

    Node spacing is uniform and <= h; the three outer ends are free and the
    inner ends share junction id 'j0'.
    """
    if extent <= 0 or h <= 0:
        raise ValueError(f"extent and h must be positive, got extent={extent}, h={h}")
    if h >= extent:
        raise ValueError(f"node spacing h={h} must be smaller than extent={extent}")
    n_seg = int(math.ceil(extent / h))
    s = np.linspace(0.0, extent, n_seg + 1)
    dirs = frame.ray_directions()
    curves = []
    for j in range(3):
        nodes = frame.xi + s[:, None] * dirs[j]
        curves.append(Curve(nodes, (junction_tag("j0"), TAG_FREE)))
    return Network(tuple(curves), {"j0": frame.xi.copy()})


def dist_to_triod(points: np.ndarray, frame: TriodFrame = IDENTITY_FRAME) -> np.ndarray | float:
    """Euclidean distance to the infinite three-ray set R_theta(J) + xi.

    Minimum over the three half-line projections; on the equidistance locus
    the common value is returned.  Accepts a single point or an (n, 2) array.
    """
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    local = frame.to_local(pts)
    # t = projection parameter onto each ray; clamp at the vertex.
    t = np.clip(local @ RAY_DIRS.T, 0.0, None)  # (n, 3)
    foot = t[:, :, None] * RAY_DIRS[None, :, :]  # (n, 3, 2)
    d = np.linalg.norm(local[:, None, :] - foot, axis=2).min(axis=1)
    return float(d[0]) if single else d


def d_metric(frame1: TriodFrame, frame2: TriodFrame, R: float = 1.0) -> float:
    """The scale-R metric max{R^-1 |xi1-xi2|, |theta1-theta2|} on the similarity class."""
    if R <= 0:
        raise ValueError(f"metric scale R must be positive, got {R}")
    return max(
        float(np.linalg.norm(frame1.xi - frame2.xi)) / R,
        abs(frame1.theta - frame2.theta),
    )


def _segment_gaps(P1: np.ndarray, P2: np.ndarray, Q1: np.ndarray, Q2: np.ndarray) -> np.ndarray:
    """Minimum distance between segment pairs (vectorized over leading axis)."""

    def point_seg(p, a, b):
        ab = b - a
        denom = np.einsum("ij,ij->i", ab, ab)
        t = np.einsum("ij,ij->i", p - a, ab) / np.where(denom > 0, denom, 1.0)
        t = np.clip(t, 0.0, 1.0)
        return np.linalg.norm(p - (a + t[:, None] * ab), axis=1)

    d = np.minimum.reduce([
        point_seg(P1, Q1, Q2), point_seg(P2, Q1, Q2),
        point_seg(Q1, P1, P2), point_seg(Q2, P1, P2),
    ])
    # Proper crossings have distance zero regardless of endpoint gaps.
    r = P2 - P1
    s = Q2 - Q1
    cross = lambda u, v: u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
    denom = cross(r, s)
    qp = Q1 - P1
    with np.errstate(divide="ignore", invalid="ignore"):
        t = cross(qp, s) / denom
        u = cross(qp, r) / denom
    crossing = (np.abs(denom) > 0) & (t > 0) & (t < 1) & (u > 0) & (u < 1)
    return np.where(crossing, 0.0, d)


def validate(net: Network, tol: float = 1e-9) -> list[Violation]:
    """Check the Network invariants; empty list means all hold.

    Reported kinds: node_coincide, junction_valence, junction_mismatch,
    self_intersection, curve_crossing.
    """
    out: list[Violation] = []

    for ci, curve in enumerate(net.curves):
        lens = curve.segment_lengths()
        if np.any(lens <= COINCIDE_TOL):
            i = int(np.argmax(lens <= COINCIDE_TOL))
            out.append(Violation("node_coincide", f"curve {ci}",
                                 f"consecutive nodes {i},{i + 1} coincide"))

    refs = net.junction_endpoints()
    for jid, endlist in refs.items():
        if jid not in net.junctions:
            out.append(Violation("junction_valence", f"junction {jid}",
                                 "referenced but missing from the junction table"))
            continue
        if len(endlist) != 3:
            out.append(Violation("junction_valence", f"junction {jid}",
                                 f"valence {len(endlist)}, expected 3"))
        pos = net.junctions[jid]
        for ci, end in endlist:
            node = net.curves[ci].nodes[end]
            if np.linalg.norm(node - pos) > COINCIDE_TOL:
                out.append(Violation(
                    "junction_mismatch", f"curve {ci} end {end}",
                    f"endpoint {node.tolist()} != junction {jid} at {pos.tolist()}"))

    # Embeddedness: curves touch only at shared junction points.
    seg_curve, seg_index, seg_a, seg_b = [], [], [], []
    for ci, curve in enumerate(net.curves):
        n = curve.nodes
        seg_curve.append(np.full(len(n) - 1, ci))
        seg_index.append(np.arange(len(n) - 1))
        seg_a.append(n[:-1])
        seg_b.append(n[1:])
    cid = np.concatenate(seg_curve)
    sid = np.concatenate(seg_index)
    A = np.concatenate(seg_a)
    B = np.concatenate(seg_b)
    m = len(A)
    if m > 1:
        ii, jj = np.triu_indices(m, k=1)
        # bounding-box prune
        lo_i = np.minimum(A, B) - tol
        hi_i = np.maximum(A, B) + tol
        keep = np.all(lo_i[ii] <= hi_i[jj], axis=1) & np.all(lo_i[jj] <= hi_i[ii], axis=1)
        ii, jj = ii[keep], jj[keep]
        same = cid[ii] == cid[jj]
        adjacent = same & (np.abs(sid[ii] - sid[jj]) == 1)
        # wrap adjacency for closed curves
        for ci, curve in enumerate(net.curves):
            if curve.closed:
                last = len(curve.nodes) - 2
                wrap = same & (cid[ii] == ci) & (
                    (np.minimum(sid[ii], sid[jj]) == 0) & (np.maximum(sid[ii], sid[jj]) == last))
                adjacent |= wrap
        ii, jj = ii[~adjacent], jj[~adjacent]
        if len(ii):
            gaps = _segment_gaps(A[ii], B[ii], A[jj], B[jj])
            hit = gaps < tol
            jpos = np.array(list(net.junctions.values())) if net.junctions else np.zeros((0, 2))
            for i, j in zip(ii[hit], jj[hit]):
                # touching at a shared junction is legitimate
                ends = np.array([A[i], B[i], A[j], B[j]])
                at_junction = False
                for p in jpos:
                    near = np.linalg.norm(ends - p, axis=1) < 10 * tol
                    if near[:2].any() and near[2:].any():
                        at_junction = True
                        break
                if at_junction:
                    continue
                kind = "self_intersection" if cid[i] == cid[j] else "curve_crossing"
                out.append(Violation(
                    kind, f"curves {cid[i]},{cid[j]}",
                    f"segments {sid[i]},{sid[j]} intersect near {A[i].tolist()}"))
    return out
