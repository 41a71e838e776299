"""Named initial networks and ready-made scenarios for the simulator."""

from __future__ import annotations

import math

import numpy as np

from .flow import ForcingField, Scenario
from .geometry import (
    Curve,
    Network,
    TAG_CLAMPED,
    TAG_FREE,
    TriodFrame,
    junction_tag,
    rotation,
    standard_triod,
)


def triod(extent: float = 2.0, h: float = 0.01, theta: float = 0.0,
          xi=(0.0, 0.0)) -> Network:
    return standard_triod(TriodFrame(theta, np.asarray(xi, dtype=float)), extent, h)


# Per-ray amplitude multipliers; asymmetric so the junction actually moves.
PERTURB_WEIGHTS = (1.0, -0.6, 0.3)


def perturbed_triod(extent: float = 2.0, h: float = 0.01, amplitude: float = 0.02,
                    theta: float = 0.0, xi=(0.0, 0.0)) -> Network:
    """Triod with sinusoidal graph perturbations f_j(x) = a*c_j*sin(pi x / extent).

    The profile vanishes at the junction and at the outer ends, so the network
    invariants hold exactly at t = 0.
    """
    frame = TriodFrame(theta, np.asarray(xi, dtype=float))
    n_seg = int(math.ceil(extent / h))
    s = np.linspace(0.0, extent, n_seg + 1)
    rot = rotation(frame.theta)
    curves = []
    for j in range(3):
        f = amplitude * PERTURB_WEIGHTS[j] * np.sin(math.pi * s / extent)
        local = np.stack([s, f], axis=1) @ rotation(2.0 * math.pi * j / 3.0).T
        nodes = frame.xi + local @ rot.T
        curves.append(Curve(nodes, (junction_tag("j0"), TAG_FREE)))
    return Network(tuple(curves), {"j0": frame.xi.copy()})


def circle(radius: float = 1.0, n: int = 256, center=(0.0, 0.0)) -> Network:
    ang = np.linspace(0.0, 2.0 * math.pi, n + 1)
    nodes = np.asarray(center, dtype=float) + radius * np.stack(
        [np.cos(ang), np.sin(ang)], axis=1)
    nodes[-1] = nodes[0]
    return Network((Curve(nodes, (TAG_FREE, TAG_FREE)),), {})


def grim_reaper(half_width: float = 1.4, h: float = 0.01) -> Network:
    """The translating graph y = -ln cos x, clamped at x = +-half_width.

    Under curvature flow it translates vertically at unit speed; pair it with
    clamp motion (0, 1) so the ends follow the exact solution.
    """
    if not 0 < half_width < math.pi / 2:
        raise ValueError("half_width must lie in (0, pi/2)")
    # parametrize by x densely, then resample to near-uniform arclength
    x = np.linspace(-half_width, half_width, 4097)
    y = -np.log(np.cos(x))
    seg = np.hypot(np.diff(x), np.diff(y))
    s = np.concatenate([[0.0], np.cumsum(seg)])
    n_seg = int(math.ceil(s[-1] / h))
    s_new = np.linspace(0.0, s[-1], n_seg + 1)
    nodes = np.stack([np.interp(s_new, s, x), np.interp(s_new, s, y)], axis=1)
    return Network((Curve(nodes, (TAG_CLAMPED, TAG_CLAMPED)),), {})


def segment(length: float = 2.0, h: float = 0.01, clamped: bool = True) -> Network:
    n_seg = int(math.ceil(length / h))
    x = np.linspace(-length / 2, length / 2, n_seg + 1)
    nodes = np.stack([x, np.zeros_like(x)], axis=1)
    tag = TAG_CLAMPED if clamped else TAG_FREE
    return Network((Curve(nodes, (tag, tag)),), {})


def lens(bridge: float = 0.4, arm: float = 1.2, h: float = 0.01,
         opening_deg: float = 110.0) -> Network:
    """Two triple junctions joined by a straight bridge, with two clamped arms each.

    At 120 degrees the configuration is exactly stationary; opening the arms
    wider (default 110 degrees from the bridge axis) pulls the junctions
    together until they collide.
    """
    ja = np.array([-bridge / 2, 0.0])
    jb = np.array([bridge / 2, 0.0])
    ang = math.radians(opening_deg)

    def ray(origin, direction, tag0):
        n_seg = int(math.ceil(arm / h))
        s = np.linspace(0.0, arm, n_seg + 1)
        nodes = origin + s[:, None] * np.asarray(direction)
        return Curve(nodes, (tag0, TAG_CLAMPED))

    n_seg = int(math.ceil(bridge / h))
    s = np.linspace(0.0, bridge, n_seg + 1)
    bridge_nodes = ja + s[:, None] * np.array([1.0, 0.0])
    # arms at +-opening from each junction's bridge direction; 120 deg is the
    # balanced (stationary) case, smaller angles pull the junctions together
    curves = (
        Curve(bridge_nodes, (junction_tag("ja"), junction_tag("jb"))),
        ray(ja, (math.cos(ang), math.sin(ang)), junction_tag("ja")),
        ray(ja, (math.cos(ang), -math.sin(ang)), junction_tag("ja")),
        ray(jb, (-math.cos(ang), math.sin(ang)), junction_tag("jb")),
        ray(jb, (-math.cos(ang), -math.sin(ang)), junction_tag("jb")),
    )
    return Network(curves, {"ja": ja, "jb": jb})


NETWORK_PRESETS = {
    "triod": triod,
    "perturbed_triod": perturbed_triod,
    "circle": circle,
    "grim_reaper": grim_reaper,
    "lens": lens,
    "segment": segment,
}


def build_network(preset: str, **kwargs) -> Network:
    if preset not in NETWORK_PRESETS:
        raise ValueError(f"unknown preset {preset!r}; choose from {sorted(NETWORK_PRESETS)}")
    return NETWORK_PRESETS[preset](**kwargs)


def scenario_from_preset(preset: str, *, dt: float, t_end: float, t_start: float = 0.0,
                         snapshot_stride: int = 100, h_target: float = 0.01,
                         forcing: ForcingField | None = None,
                         clamp_motion=None, eps_len: float | None = None,
                         eps_col: float | None = None, **preset_kwargs) -> Scenario:
    net = build_network(preset, h=h_target, **preset_kwargs) \
        if preset != "circle" else build_network(preset, **preset_kwargs)
    if preset == "grim_reaper" and clamp_motion is None:
        clamp_motion = lambda x, t: np.array([0.0, 1.0])
    return Scenario(
        initial=net,
        forcing=forcing or ForcingField(),
        dt=dt, t_end=t_end, t_start=t_start,
        snapshot_stride=snapshot_stride, h_target=h_target,
        eps_len=eps_len, eps_col=eps_col, clamp_motion=clamp_motion,
    )
