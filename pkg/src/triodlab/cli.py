"""Command-line entry point: scenario runs, diagnostics batches, classification
sweeps, decay profiles and track export.

Exit codes: 0 clean, 2 run halted by a detected event, 1 error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import density as density_mod
from . import excess as excess_mod
from .flow import FlowTrajectory, herring_residual
from .geometry import TriodFrame
from .serialize import (
    _parse_forcing,
    fmt,
    load_scenario,
    read_trajectory,
    write_csv,
    write_events,
    write_trajectory,
)
from .varifold import best_mass_ratio, length_defect, phi_j, to_varifold, weigh


def thread_cap() -> int:
    """Parallelism cap from TRIODLAB_THREADS (the implementation is serial,
    which always respects the cap)."""
    try:
        return max(1, int(os.environ.get("TRIODLAB_THREADS", "1")))
    except ValueError:
        return 1


def _parse_floats(text: str, n: int, what: str) -> list[float]:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != n:
        raise ValueError(f"{what} needs {n} comma-separated numbers, got {text!r}")
    return [float(p) for p in parts]


def _default_window(traj: FlowTrajectory) -> excess_mod.Window:
    lo, hi = traj.time_range()
    s = 0.5 * (lo + hi)
    R = math.sqrt((hi - lo) / 4.0)
    return excess_mod.Window(np.zeros(2), s, R)


def _window_from_arg(traj: FlowTrajectory, arg: str | None) -> excess_mod.Window:
    if arg is None:
        return _default_window(traj)
    cx, cy, s, R = _parse_floats(arg, 4, "--window")
    return excess_mod.Window(np.array([cx, cy]), s, R)


def cmd_run(args) -> int:
    scenario_path = Path(args.scenario)
    if not scenario_path.exists():
        print(f"error: scenario file not found: {scenario_path}", file=sys.stderr)
        return 1
    scenario = load_scenario(scenario_path)
    from .flow import run as run_flow
    traj = run_flow(scenario)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    name = args.name or scenario_path.stem
    write_trajectory(out / f"{name}.jsonl", traj)
    write_events(out / f"{name}.events.jsonl", traj)
    print(f"wrote {out / (name + '.jsonl')} ({len(traj.snapshots)} snapshots, "
          f"{len(traj.events)} events)")
    return 2 if traj.events else 0


def diagnostics_rows(traj: FlowTrajectory, w: excess_mod.Window, kappa: float,
                     tau0: float | None, forcing) -> list[list]:
    excess_mod.check_window(traj, w)
    rows: list[list] = []
    meta = [w.center[0], w.center[1], w.s, w.R]

    def add(quantity: str, params: str, value: float):
        rows.append([quantity, *meta, params, value])

    frame, mu_star = excess_mod.fit_frame(traj, w)
    add("mu_star", "", mu_star)
    add("frame_theta", "", frame.theta)
    add("frame_xi_x", "", float(frame.xi[0]))
    add("frame_xi_y", "", float(frame.xi[1]))
    add("u_norm", f"p={forcing.p:g};q={forcing.q:g}", excess_mod.u_norm(traj, w, forcing))

    defect_sup, energy = excess_mod.curvature_energy(traj, w)
    add("mass_defect_sup", "", defect_sup)
    add("curvature_energy", "", energy)

    t0 = w.t_hi
    add("shrinker_energy", f"t0={fmt(t0)}", excess_mod.shrinker_energy(traj, t0, w))
    add("weighted_noncon", f"t0={fmt(t0)};kappa={kappa:g}",
        excess_mod.weighted_noncon(traj, t0, w, kappa, frame))

    lo, _ = traj.time_range()
    tau_top = tau0 if tau0 is not None else 0.08
    tau_top = min(tau_top, (w.s - lo) / 2.0)
    gap = traj.median_gap()
    if tau_top / 4.0 >= 2.0 * gap > 0:
        prof = density_mod.density_limit(
            traj, w.center, w.s, (tau_top, tau_top / 2.0, tau_top / 4.0))
        add("gaussian_density", f"tau0={fmt(tau_top)}", prof.extrapolated)
        add("density_monotone", f"tau0={fmt(tau_top)}", 1.0 if prof.monotone else 0.0)

    zoom = excess_mod._normalized(traj, w)
    mid = zoom.network_at(0.0)
    defects = length_defect(to_varifold(mid, clip=(np.zeros(2), 2.0)))
    add("length_defect_b1", "normalized", defects.defect1)
    add("length_defect_phirad", "normalized", defects.defect2)
    add("herring_residual", "t=window_end", herring_residual(traj.network_at(w.t_hi)))
    add("mass_ratio_sup", "E1 estimate", best_mass_ratio(mid))

    frame_n = TriodFrame(frame.theta, (frame.xi - w.center) / w.R)
    for tag, tq in (("lo", -2.0), ("hi", 2.0)):
        net = zoom.network_at(tq)
        V = to_varifold(net)
        for j in (1, 2, 3):
            add(f"phi_mass_{tag}", f"j={j}", weigh(V, phi_j(j, frame_n, 1.0)))
    return rows


CSV_HEADER = ["quantity", "window_center_x", "window_center_y", "window_s",
              "window_R", "params", "value"]


def cmd_diagnose(args) -> int:
    traj = read_trajectory(args.traj)
    forcing = _parse_forcing(args.forcing or "zero", args.p, args.q)
    w = _window_from_arg(traj, args.window)
    rows = diagnostics_rows(traj, w, args.kappa, args.tau0, forcing)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "diagnostics.csv", CSV_HEADER, rows)
    print(f"wrote {out / 'diagnostics.csv'} ({len(rows)} quantities)")
    return 0


def cmd_classify(args) -> int:
    traj = read_trajectory(args.traj)
    w = _window_from_arg(traj, args.window)
    nx, ny, nt = (int(v) for v in _parse_floats(args.grid, 3, "--grid"))
    cfg = density_mod.TangentConfig(tau0=args.tau0) if args.tau0 else density_mod.TangentConfig()
    pad = 2.0 * cfg.tau0
    lo, hi = traj.time_range()
    t_lo = max(w.t_lo, lo + pad)
    t_hi = min(w.t_hi, hi)
    grid = density_mod.spacetime_grid(
        (w.center[0] - w.R, w.center[0] + w.R),
        (w.center[1] - w.R, w.center[1] + w.R),
        (t_lo, t_hi), nx, ny, nt)
    points = density_mod.stratify(traj, grid, cfg)
    rows = [[p.y[0], p.y[1], p.s, p.label.theta_star, p.label.static_score,
             p.label.kind, p.dimension] for p in points]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "strata.csv",
              ["y_x", "y_y", "s", "theta_star", "static_score", "label", "D"], rows)
    print(f"wrote {out / 'strata.csv'} ({len(rows)} singular points)")
    return 0


def cmd_decay(args) -> int:
    traj = read_trajectory(args.traj)
    cx, cy, s = _parse_floats(args.center, 3, "--center")
    scales = [float(v) for v in args.scales.split(",") if v.strip()]
    profile = excess_mod.decay_profile(traj, (np.array([cx, cy]), s), scales)
    payload = {
        "center": [cx, cy, s],
        "points": [
            {"scale": p.scale, "mu": p.mu, "theta": p.frame.theta,
             "xi": [float(p.frame.xi[0]), float(p.frame.xi[1])], "drift": p.drift}
            for p in profile.points
        ],
        "exponent": profile.exponent,
        "at_noise_floor": profile.at_noise_floor,
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "decay.json", "w") as f:
        json.dump(payload, f, indent=1)
        f.write("\n")
    print(f"wrote {out / 'decay.json'} (exponent={payload['exponent']})")
    return 0


def cmd_export(args) -> int:
    traj = read_trajectory(args.traj)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    region = excess_mod.TrackRegion()
    if args.region:
        cx, cy, r = _parse_floats(args.region, 3, "--region")
        region = excess_mod.TrackRegion(center=np.array([cx, cy]), radius=r)
    track = excess_mod.track_junctions(traj, region)
    rows = [[float(t), float(p[0]), float(p[1]), int(g)]
            for t, p, g in zip(track.times, track.positions, track.gaps)]
    write_csv(out / "track.csv", ["t", "x", "y", "gap"], rows)

    t_min_gap = args.t_min_gap if args.t_min_gap else 4.0 * traj.median_gap()
    holder: dict = {"t_min_gap": t_min_gap}
    try:
        fit = excess_mod.holder_exponent(track, t_min_gap)
        holder.update(exponent=fit.exponent if math.isfinite(fit.exponent) else None,
                      constant=fit.constant, n_pairs=fit.n_pairs,
                      n_below_floor=fit.n_below_floor,
                      infinite_regularity=fit.infinite_regularity)
    except ValueError as exc:
        holder.update(error=str(exc))
    with open(out / "holder.json", "w") as f:
        json.dump(holder, f, indent=1)
        f.write("\n")

    if args.center:
        cx, cy, s = _parse_floats(args.center, 3, "--center")
        tau0 = args.tau0 or 0.08
        prof = density_mod.density_limit(
            traj, np.array([cx, cy]), s, (tau0, tau0 / 2.0, tau0 / 4.0))
        with open(out / "density_profile.json", "w") as f:
            json.dump({"center": list(prof.center), "taus": list(prof.taus),
                       "values": list(prof.values), "extrapolated": prof.extrapolated,
                       "monotone": prof.monotone}, f, indent=1)
            f.write("\n")
    print(f"wrote track/holder exports to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="triodlab",
                                 description="triple-junction network flow laboratory")
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate a scenario file")
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--name", default=None)
    p_run.set_defaults(func=cmd_run)

    p_diag = sub.add_parser("diagnose", help="diagnostics battery over one window")
    p_diag.add_argument("--traj", required=True)
    p_diag.add_argument("--out", required=True)
    p_diag.add_argument("--window", default=None, help='"cx,cy,s,R"')
    p_diag.add_argument("--kappa", type=float, default=0.5)
    p_diag.add_argument("--tau0", type=float, default=None)
    p_diag.add_argument("--forcing", default=None)
    p_diag.add_argument("--p", type=float, default=2.0)
    p_diag.add_argument("--q", type=float, default=8.0)
    p_diag.set_defaults(func=cmd_diagnose)

    p_cls = sub.add_parser("classify", help="tangent-flow classification sweep")
    p_cls.add_argument("--traj", required=True)
    p_cls.add_argument("--out", required=True)
    p_cls.add_argument("--window", default=None, help='"cx,cy,s,R"')
    p_cls.add_argument("--grid", required=True, help='"nx,ny,nt"')
    p_cls.add_argument("--tau0", type=float, default=None)
    p_cls.set_defaults(func=cmd_classify)

    p_dec = sub.add_parser("decay", help="excess decay profile over dyadic scales")
    p_dec.add_argument("--traj", required=True)
    p_dec.add_argument("--out", required=True)
    p_dec.add_argument("--center", required=True, help='"cx,cy,s"')
    p_dec.add_argument("--scales", required=True, help='"s1,s2,..."')
    p_dec.set_defaults(func=cmd_decay)

    p_exp = sub.add_parser("export", help="junction track, Holder fit, density profile")
    p_exp.add_argument("--traj", required=True)
    p_exp.add_argument("--out", required=True)
    p_exp.add_argument("--center", default=None, help='"cx,cy,s"')
    p_exp.add_argument("--region", default=None, help='"cx,cy,r"')
    p_exp.add_argument("--tau0", type=float, default=None)
    p_exp.add_argument("--t-min-gap", dest="t_min_gap", type=float, default=None)
    p_exp.set_defaults(func=cmd_export)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
