/**
 * The four figure kinds. Figures are read-only views: every number or label
 * drawn on them is copied from an input file field and carries a provenance
 * pointer; nothing is recomputed from the trajectory data.
 */

import {
  DecayFile,
  DensityProfileFile,
  HolderFile,
  Snapshot,
  StrataRow,
  TrackRow,
} from "./schemas.js";
import { Svg, fmt, linearScale, niceTicks } from "./svg.js";

export interface Annotation {
  text: string;
  source: string; // "<file>#<pointer>"
}

export interface Figure {
  svg: string;
  annotations: Annotation[];
}

const W = 720;
const H = 480;
const MARGIN = 52;

function drawAxes(
  svg: Svg,
  xLabel: string,
  yLabel: string,
  xs: ReturnType<typeof linearScale>,
  ys: ReturnType<typeof linearScale>,
  xTickFmt: (v: number) => string = fmt,
  yTickFmt: (v: number) => string = fmt,
): void {
  svg.rect(MARGIN, MARGIN / 2, W - 1.5 * MARGIN, H - 1.5 * MARGIN, "#888");
  for (const tx of niceTicks(xs.min, xs.max)) {
    const px = xs.toPx(tx);
    svg.line(px, H - MARGIN, px, H - MARGIN + 4, "#444");
    svg.text(px, H - MARGIN + 16, xTickFmt(tx), 9, "middle");
  }
  for (const ty of niceTicks(ys.min, ys.max)) {
    const py = ys.toPx(ty);
    svg.line(MARGIN - 4, py, MARGIN, py, "#444");
    svg.text(MARGIN - 6, py + 3, yTickFmt(ty), 9, "end");
  }
  svg.text(W / 2, H - 8, xLabel, 12, "middle");
  svg.text(14, H / 2, yLabel, 12, "middle");
}

export function renderSnapshots(snapshots: Snapshot[], trajPath: string): Figure {
  const annotations: Annotation[] = [];
  const panels = Math.min(6, snapshots.length);
  const picks: number[] = [];
  for (let i = 0; i < panels; i++) {
    picks.push(Math.round((i * (snapshots.length - 1)) / Math.max(1, panels - 1)));
  }
  let [xMin, xMax, yMin, yMax] = [Infinity, -Infinity, Infinity, -Infinity];
  for (const k of picks) {
    for (const curve of snapshots[k].curves) {
      for (const [x, y] of curve) {
        xMin = Math.min(xMin, x);
        xMax = Math.max(xMax, x);
        yMin = Math.min(yMin, y);
        yMax = Math.max(yMax, y);
      }
    }
  }
  const cols = Math.min(3, panels);
  const rows = Math.ceil(panels / cols);
  const svg = new Svg(W, H);
  const pw = (W - 20) / cols;
  const ph = (H - 20) / rows;
  const span = Math.max(xMax - xMin, yMax - yMin) || 1;
  picks.forEach((k, i) => {
    const snap = snapshots[k];
    const ox = 10 + (i % cols) * pw;
    const oy = 10 + Math.floor(i / cols) * ph;
    const side = Math.min(pw, ph) - 26;
    const toPx = (x: number, y: number): [number, number] => [
      ox + 4 + ((x - xMin) / span) * side,
      oy + 18 + side - ((y - yMin) / span) * side,
    ];
    svg.rect(ox + 2, oy + 16, side + 4, side + 4, "#bbb");
    for (const curve of snap.curves) {
      svg.polyline(curve.map(([x, y]) => toPx(x, y)), "#1f4e8c");
    }
    for (const [jid, [jx, jy]] of Object.entries(snap.junctions).sort()) {
      const [px, py] = toPx(jx, jy);
      svg.circle(px, py, 3, "#c23");
      void jid;
    }
    const label = `t = ${fmt(snap.t)}`;
    svg.text(ox + 4, oy + 12, label, 10);
    annotations.push({ text: label, source: `${trajPath}#snapshot[${k}]/t` });
  });
  svg.text(W / 2, H - 4, "network snapshots (junction marked)", 11, "middle");
  return { svg: svg.render(), annotations };
}

export function renderDensityProfile(
  profile: DensityProfileFile,
  profilePath: string,
  strata?: StrataRow[],
  strataPath?: string,
): Figure {
  const annotations: Annotation[] = [];
  const svg = new Svg(W, H);
  const tauMax = Math.max(...profile.taus);
  const vals = [...profile.values, profile.extrapolated];
  const vMin = Math.min(...vals) - 0.02;
  const vMax = Math.max(...vals) + 0.02;
  const xs = linearScale(0, tauMax * 1.05, MARGIN, W - MARGIN / 2);
  const ys = linearScale(vMin, vMax, H - MARGIN, MARGIN / 2);
  drawAxes(svg, "kernel scale tau", "Gaussian density Theta", xs, ys);

  const pts: Array<[number, number]> = profile.taus.map((tau, i) => [
    xs.toPx(tau),
    ys.toPx(profile.values[i]),
  ]);
  svg.polyline(pts, "#1f4e8c", 1.5);
  profile.taus.forEach((tau, i) => {
    svg.circle(xs.toPx(tau), ys.toPx(profile.values[i]), 3.5, "#1f4e8c");
    annotations.push({
      text: `Theta(tau=${fmt(tau)}) = ${fmt(profile.values[i])}`,
      source: `${profilePath}#/values[${i}]`,
    });
  });
  const ey = ys.toPx(profile.extrapolated);
  svg.line(MARGIN, ey, W - MARGIN / 2, ey, "#c23");
  const extText = `Theta extrapolated = ${fmt(profile.extrapolated)}`;
  svg.text(W - MARGIN / 2 - 4, ey - 6, extText, 10, "end", "#c23");
  annotations.push({ text: extText, source: `${profilePath}#/extrapolated` });

  const centerText = `center = (${fmt(profile.center[0])}, ${fmt(profile.center[1])}), s = ${fmt(profile.center[2])}`;
  svg.text(MARGIN + 4, MARGIN / 2 + 14, centerText, 10);
  annotations.push({ text: centerText, source: `${profilePath}#/center` });

  if (strata !== undefined && strataPath !== undefined) {
    const text =
      strata.length === 0 ? "no singular points" : `singular points: ${strata.length}`;
    svg.text(MARGIN + 4, MARGIN / 2 + 28, text, 10, "start", "#c23");
    annotations.push({ text, source: `${strataPath}#rows` });
  }
  return { svg: svg.render(), annotations };
}

export function renderDecayLoglog(decay: DecayFile, decayPath: string): Figure {
  const annotations: Annotation[] = [];
  const svg = new Svg(W, H);
  const lx = decay.points.map((p) => Math.log10(p.scale));
  const ly = decay.points.map((p) => Math.log10(p.mu));
  const xs = linearScale(Math.min(...lx) - 0.1, Math.max(...lx) + 0.1, MARGIN, W - MARGIN / 2);
  const ys = linearScale(Math.min(...ly) - 0.15, Math.max(...ly) + 0.15, H - MARGIN, MARGIN / 2);
  drawAxes(
    svg,
    "log10 window scale",
    "log10 excess mu",
    xs,
    ys,
  );
  decay.points.forEach((p, i) => {
    svg.circle(xs.toPx(Math.log10(p.scale)), ys.toPx(Math.log10(p.mu)), 4, "#1f4e8c");
    annotations.push({
      text: `mu(${fmt(p.scale)}) = ${fmt(p.mu)}`,
      source: `${decayPath}#/points[${i}]/mu`,
    });
  });
  if (decay.exponent !== null) {
    // guide line with the file's fitted slope through the centroid of the file's points
    const cx = lx.reduce((a, b) => a + b, 0) / lx.length;
    const cy = ly.reduce((a, b) => a + b, 0) / ly.length;
    const x0 = xs.min + 0.05;
    const x1 = xs.max - 0.05;
    svg.line(
      xs.toPx(x0),
      ys.toPx(cy + decay.exponent * (x0 - cx)),
      xs.toPx(x1),
      ys.toPx(cy + decay.exponent * (x1 - cx)),
      "#c23",
      1.5,
    );
    const slopeText = `fitted slope (decay exponent) = ${fmt(decay.exponent)}`;
    svg.text(MARGIN + 4, MARGIN / 2 + 14, slopeText, 11, "start", "#c23");
    annotations.push({ text: slopeText, source: `${decayPath}#/exponent` });
  }
  if (decay.atNoiseFloor) {
    const text = "residuals at the fit noise floor";
    svg.text(MARGIN + 4, MARGIN / 2 + 28, text, 10);
    annotations.push({ text, source: `${decayPath}#/at_noise_floor` });
  }
  return { svg: svg.render(), annotations };
}

export function renderJunctionTrack(
  rows: TrackRow[],
  trackPath: string,
  holder: HolderFile,
  holderPath: string,
): Figure {
  const annotations: Annotation[] = [];
  const svg = new Svg(W, H);
  const good = rows.filter((r) => !r.gap);
  if (good.length === 0) {
    const text = "no junction identified (all gaps)";
    svg.text(W / 2, H / 2, text, 12, "middle");
    annotations.push({ text, source: `${trackPath}#rows` });
    return { svg: svg.render(), annotations };
  }
  const ts = good.map((r) => r.t);
  const xsVals = good.map((r) => r.x);
  const ysVals = good.map((r) => r.y);
  const vMin = Math.min(...xsVals, ...ysVals);
  const vMax = Math.max(...xsVals, ...ysVals);
  const pad = 0.1 * (vMax - vMin || 1);
  const xs = linearScale(Math.min(...ts), Math.max(...ts), MARGIN, W - MARGIN / 2);
  const ys = linearScale(vMin - pad, vMax + pad, H - MARGIN, MARGIN / 2);
  drawAxes(svg, "time t", "junction path components", xs, ys);

  // polylines broken at gap rows
  for (const [comp, color] of [
    ["x", "#1f4e8c"],
    ["y", "#2a8c4a"],
  ] as const) {
    let segment: Array<[number, number]> = [];
    for (const r of rows) {
      if (r.gap) {
        svg.polyline(segment, color, 1.5);
        segment = [];
      } else {
        segment.push([xs.toPx(r.t), ys.toPx(comp === "x" ? r.x : r.y)]);
      }
    }
    svg.polyline(segment, color, 1.5);
  }
  svg.text(W - MARGIN / 2 - 4, MARGIN / 2 + 14, "x: blue, y: green", 10, "end");

  if (holder.infiniteRegularity) {
    const text = "constant track: displacement below floor at every pair";
    svg.text(MARGIN + 4, MARGIN / 2 + 14, text, 10);
    annotations.push({ text, source: `${holderPath}#/infinite_regularity` });
  } else if (holder.exponent !== null && holder.constant !== null) {
    // Holder fit overlay: envelope |a(t) - a(t0)| = C |t - t0|^alpha from the first sample
    const t0 = good[0].t;
    const x0 = good[0].x;
    const env: Array<[number, number]> = [];
    const envLo: Array<[number, number]> = [];
    const n = 64;
    for (let i = 0; i <= n; i++) {
      const t = t0 + ((xs.max - t0) * i) / n;
      const dev = holder.constant * Math.pow(Math.max(t - t0, 0), holder.exponent);
      env.push([xs.toPx(t), ys.toPx(x0 + dev)]);
      envLo.push([xs.toPx(t), ys.toPx(x0 - dev)]);
    }
    svg.polyline(env, "#c23", 1);
    svg.polyline(envLo, "#c23", 1);
    const text = `Holder fit: exponent = ${fmt(holder.exponent)}, C = ${fmt(holder.constant)}`;
    svg.text(MARGIN + 4, MARGIN / 2 + 14, text, 11, "start", "#c23");
    annotations.push({ text, source: `${holderPath}#/exponent` });
    annotations.push({
      text: `C = ${fmt(holder.constant)}`,
      source: `${holderPath}#/constant`,
    });
  }
  return { svg: svg.render(), annotations };
}
