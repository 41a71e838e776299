"""File formats: JSON Lines trajectories, key-value scenario configs, CSV reports.

Trajectory schema, one JSON object per line:

    {"t": <real>, "curves": [[[x, y], ...], ...],
     "end_tags": [[tag, tag], ...], "junctions": {"id": [x, y]}}

Event records carry {"t", "kind", "data"} and no "curves" key; readers accept
mixed streams.  Floats round-trip bit-exactly (shortest-repr JSON, %.17g CSV).
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .flow import FlowTrajectory, ForcingField, Scenario
from .geometry import Curve, Network
from .presets import NETWORK_PRESETS, build_network


def network_to_record(t: float, net: Network) -> dict:
    return {
        "t": float(t),
        "curves": [[[float(x), float(y)] for x, y in c.nodes] for c in net.curves],
        "end_tags": [list(c.end_tags) for c in net.curves],
        "junctions": {k: [float(v[0]), float(v[1])] for k, v in sorted(net.junctions.items())},
    }


def network_from_record(rec: dict) -> tuple[float, Network]:
    curves = tuple(
        Curve(np.asarray(nodes, dtype=float), tuple(tags))
        for nodes, tags in zip(rec["curves"], rec["end_tags"]))
    junctions = {k: np.asarray(v, dtype=float) for k, v in rec.get("junctions", {}).items()}
    return float(rec["t"]), Network(curves, junctions)


def write_trajectory(path, traj: FlowTrajectory) -> None:
    with open(path, "w") as f:
        for t, net in traj.snapshots:
            f.write(json.dumps(network_to_record(t, net)) + "\n")


def write_events(path, traj: FlowTrajectory) -> None:
    with open(path, "w") as f:
        for t, ev in traj.events:
            f.write(json.dumps({"t": float(t), "kind": ev["kind"], "data": ev["data"]}) + "\n")


def read_trajectory(path, forcing: ForcingField | None = None) -> FlowTrajectory:
    snapshots: list[tuple[float, Network]] = []
    events: list[tuple[float, dict]] = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: malformed JSON line ({exc})") from exc
            if "curves" in rec:
                snapshots.append(network_from_record(rec))
            else:
                events.append((float(rec["t"]), {"kind": rec.get("kind", "unknown"),
                                                 "data": rec.get("data", {})}))
    if not snapshots:
        raise ValueError(f"{path}: no snapshots found")
    snapshots.sort(key=lambda p: p[0])
    return FlowTrajectory(snapshots, forcing or ForcingField(), events)


def read_events(path) -> list[tuple[float, dict]]:
    out = []
    p = Path(path)
    if not p.exists():
        return out
    with open(p) as f:
        for line in f:
            line = line.strip()
            if line:
                rec = json.loads(line)
                out.append((float(rec["t"]), {"kind": rec["kind"], "data": rec.get("data", {})}))
    return out


# ---------------------------------------------------------------------------
# scenario config:  "key = value" lines, '#' comments
# ---------------------------------------------------------------------------

SCENARIO_KEYS = {
    "preset", "dt", "t_start", "t_end", "snapshot_stride", "h_target",
    "eps_len", "eps_col", "forcing", "p", "q", "clamp_motion",
    # preset parameters
    "extent", "amplitude", "theta", "xi", "radius", "n", "half_width",
    "length", "bridge", "arm", "opening_deg", "clamped",
}


def parse_config_text(text: str) -> dict:
    cfg: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in SCENARIO_KEYS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        cfg[key] = val
    return cfg


def _parse_vector(text: str) -> np.ndarray:
    return np.array([float(p) for p in text.split(",")], dtype=float)


def _parse_forcing(text: str, p: float, q: float) -> ForcingField:
    text = text.strip()
    if text in ("", "zero"):
        return ForcingField(p=p, q=q)
    if text.startswith("constant:"):
        return ForcingField("constant", {"vector": _parse_vector(text[len("constant:"):])},
                            p=p, q=q)
    if text.startswith("preset:"):
        parts = text.split(":")
        name = parts[1]
        if name == "translation":
            return ForcingField("preset", {"name": name, "vector": _parse_vector(parts[2])},
                                p=p, q=q)
        if name == "vortex":
            vals = _parse_vector(parts[2]) if len(parts) > 2 else np.array([0.0, 0.0, 1.0])
            return ForcingField("preset", {"name": name,
                                           "center": vals[:2], "omega": float(vals[2])},
                                p=p, q=q)
        raise ValueError(f"unknown forcing preset {name!r}")
    raise ValueError(f"cannot parse forcing field {text!r}")


def scenario_from_config(cfg: dict) -> Scenario:
    preset = cfg.get("preset")
    if preset not in NETWORK_PRESETS:
        raise ValueError(f"config needs preset, one of {sorted(NETWORK_PRESETS)}")
    h_target = float(cfg.get("h_target", 0.01))
    preset_kwargs: dict = {}
    if preset != "circle":
        preset_kwargs["h"] = h_target
    for key, conv in (("extent", float), ("amplitude", float), ("theta", float),
                      ("radius", float), ("n", int), ("half_width", float),
                      ("length", float), ("bridge", float), ("arm", float),
                      ("opening_deg", float)):
        if key in cfg:
            preset_kwargs[key] = conv(cfg[key])
    if "xi" in cfg:
        preset_kwargs["xi"] = _parse_vector(cfg["xi"])
    if "clamped" in cfg:
        preset_kwargs["clamped"] = cfg["clamped"].lower() in ("1", "true", "yes")
    net = build_network(preset, **preset_kwargs)

    p = float(cfg.get("p", 2.0))
    q = float(cfg.get("q", 8.0))
    forcing = _parse_forcing(cfg.get("forcing", "zero"), p, q)

    clamp_motion = None
    if "clamp_motion" in cfg:
        vel = _parse_vector(cfg["clamp_motion"])
        clamp_motion = lambda x, t: vel
    elif preset == "grim_reaper":
        clamp_motion = lambda x, t: np.array([0.0, 1.0])

    def opt_float(key):
        return float(cfg[key]) if key in cfg else None

    return Scenario(
        initial=net,
        forcing=forcing,
        dt=float(cfg.get("dt", 1e-5)),
        t_end=float(cfg["t_end"]),
        t_start=float(cfg.get("t_start", 0.0)),
        snapshot_stride=int(cfg.get("snapshot_stride", 100)),
        h_target=h_target,
        eps_len=opt_float("eps_len"),
        eps_col=opt_float("eps_col"),
        clamp_motion=clamp_motion,
    )


def load_scenario(path) -> Scenario:
    return scenario_from_config(parse_config_text(Path(path).read_text()))


# ---------------------------------------------------------------------------
# report CSV
# ---------------------------------------------------------------------------

def fmt(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def write_csv(path, header: list[str], rows: list[list]) -> None:
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(fmt(v) for v in row) + "\n")
