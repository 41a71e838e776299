/**
 * Parsers for the triodlab file formats. Every parse failure names the
 * offending field so schema drift is caught loudly, and every value carries
 * its source pointer for the provenance check.
 */

export interface Snapshot {
  t: number;
  curves: number[][][];           // per curve: [ [x, y], ... ]
  endTags: string[][];
  junctions: Record<string, [number, number]>;
}

export interface DecayPoint {
  scale: number;
  mu: number;
  theta: number;
  xi: [number, number];
  drift: number;
}

export interface DecayFile {
  center: [number, number, number];
  points: DecayPoint[];
  exponent: number | null;
  atNoiseFloor: boolean;
}

export interface DensityProfileFile {
  center: [number, number, number];
  taus: number[];
  values: number[];
  extrapolated: number;
  monotone: boolean;
}

export interface HolderFile {
  tMinGap: number;
  exponent: number | null;
  constant: number | null;
  nPairs: number | null;
  infiniteRegularity: boolean;
}

export interface TrackRow {
  t: number;
  x: number;
  y: number;
  gap: boolean;
}

export interface StrataRow {
  yX: number;
  yY: number;
  s: number;
  thetaStar: number;
  staticScore: number;
  label: string;
  dimension: number;
}

export class SchemaError extends Error {
  constructor(public readonly file: string, public readonly field: string, detail: string) {
    super(`${file}: field '${field}' ${detail}`);
  }
}

function requireNumber(file: string, field: string, v: unknown): number {
  if (typeof v !== "number" || !Number.isFinite(v)) {
    throw new SchemaError(file, field, `must be a finite number, got ${JSON.stringify(v)}`);
  }
  return v;
}

function requireArray(file: string, field: string, v: unknown): unknown[] {
  if (!Array.isArray(v)) {
    throw new SchemaError(file, field, "must be an array");
  }
  return v;
}

export function parseTrajectory(text: string, file: string): Snapshot[] {
  const snapshots: Snapshot[] = [];
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    let rec: Record<string, unknown>;
    try {
      rec = JSON.parse(line) as Record<string, unknown>;
    } catch (e) {
      throw new SchemaError(file, `line ${i + 1}`, `is not valid JSON (${(e as Error).message})`);
    }
    if (!("curves" in rec)) continue; // event record in a mixed stream
    const t = requireNumber(file, `line ${i + 1}/t`, rec.t);
    const curves = requireArray(file, `line ${i + 1}/curves`, rec.curves).map((c, ci) =>
      requireArray(file, `line ${i + 1}/curves[${ci}]`, c).map((p, pi) => {
        const pt = requireArray(file, `line ${i + 1}/curves[${ci}][${pi}]`, p);
        return [
          requireNumber(file, `line ${i + 1}/curves[${ci}][${pi}][0]`, pt[0]),
          requireNumber(file, `line ${i + 1}/curves[${ci}][${pi}][1]`, pt[1]),
        ];
      }),
    );
    const endTags = requireArray(file, `line ${i + 1}/end_tags`, rec.end_tags).map(
      (tags) => (tags as string[]).map(String),
    );
    const junctions: Record<string, [number, number]> = {};
    const junc = (rec.junctions ?? {}) as Record<string, unknown>;
    for (const [k, v] of Object.entries(junc)) {
      const pair = requireArray(file, `line ${i + 1}/junctions['${k}']`, v);
      junctions[k] = [
        requireNumber(file, `line ${i + 1}/junctions['${k}'][0]`, pair[0]),
        requireNumber(file, `line ${i + 1}/junctions['${k}'][1]`, pair[1]),
      ];
    }
    snapshots.push({ t, curves, endTags, junctions });
  }
  if (snapshots.length === 0) {
    throw new SchemaError(file, "snapshots", "no snapshot records found");
  }
  snapshots.sort((a, b) => a.t - b.t);
  return snapshots;
}

export function parseDecay(text: string, file: string): DecayFile {
  const rec = JSON.parse(text) as Record<string, unknown>;
  const centerArr = requireArray(file, "center", rec.center);
  const center: [number, number, number] = [
    requireNumber(file, "center[0]", centerArr[0]),
    requireNumber(file, "center[1]", centerArr[1]),
    requireNumber(file, "center[2]", centerArr[2]),
  ];
  const points = requireArray(file, "points", rec.points).map((p, i) => {
    const q = p as Record<string, unknown>;
    const xiArr = requireArray(file, `points[${i}].xi`, q.xi);
    return {
      scale: requireNumber(file, `points[${i}].scale`, q.scale),
      mu: requireNumber(file, `points[${i}].mu`, q.mu),
      theta: requireNumber(file, `points[${i}].theta`, q.theta),
      xi: [
        requireNumber(file, `points[${i}].xi[0]`, xiArr[0]),
        requireNumber(file, `points[${i}].xi[1]`, xiArr[1]),
      ] as [number, number],
      drift: requireNumber(file, `points[${i}].drift`, q.drift),
    };
  });
  const exponent = rec.exponent === null ? null : requireNumber(file, "exponent", rec.exponent);
  if (typeof rec.at_noise_floor !== "boolean") {
    throw new SchemaError(file, "at_noise_floor", "must be a boolean");
  }
  return { center, points, exponent, atNoiseFloor: rec.at_noise_floor };
}

export function parseDensityProfile(text: string, file: string): DensityProfileFile {
  const rec = JSON.parse(text) as Record<string, unknown>;
  const centerArr = requireArray(file, "center", rec.center);
  const taus = requireArray(file, "taus", rec.taus).map((v, i) =>
    requireNumber(file, `taus[${i}]`, v),
  );
  const values = requireArray(file, "values", rec.values).map((v, i) =>
    requireNumber(file, `values[${i}]`, v),
  );
  if (taus.length !== values.length) {
    throw new SchemaError(file, "values", "must match taus in length");
  }
  return {
    center: [
      requireNumber(file, "center[0]", centerArr[0]),
      requireNumber(file, "center[1]", centerArr[1]),
      requireNumber(file, "center[2]", centerArr[2]),
    ],
    taus,
    values,
    extrapolated: requireNumber(file, "extrapolated", rec.extrapolated),
    monotone: Boolean(rec.monotone),
  };
}

export function parseHolder(text: string, file: string): HolderFile {
  const rec = JSON.parse(text) as Record<string, unknown>;
  const opt = (field: string): number | null => {
    const v = rec[field];
    if (v === null || v === undefined) return null;
    return requireNumber(file, field, v);
  };
  return {
    tMinGap: requireNumber(file, "t_min_gap", rec.t_min_gap),
    exponent: opt("exponent"),
    constant: opt("constant"),
    nPairs: opt("n_pairs"),
    infiniteRegularity: Boolean(rec.infinite_regularity),
  };
}

function splitCsv(text: string, file: string, header: string[]): string[][] {
  const lines = text.split("\n").filter((l) => l.trim().length > 0);
  if (lines.length === 0) {
    throw new SchemaError(file, "header", "file is empty");
  }
  const got = lines[0].split(",");
  for (let i = 0; i < header.length; i++) {
    if (got[i] !== header[i]) {
      throw new SchemaError(file, `header[${i}]`, `expected '${header[i]}', got '${got[i]}'`);
    }
  }
  return lines.slice(1).map((l) => l.split(","));
}

export function parseTrackCsv(text: string, file: string): TrackRow[] {
  return splitCsv(text, file, ["t", "x", "y", "gap"]).map((cols, i) => ({
    t: requireNumber(file, `row ${i + 1}/t`, Number(cols[0])),
    x: Number(cols[1]),
    y: Number(cols[2]),
    gap: cols[3].trim() === "1",
  }));
}

export function parseStrataCsv(text: string, file: string): StrataRow[] {
  return splitCsv(text, file, ["y_x", "y_y", "s", "theta_star", "static_score", "label", "D"]).map(
    (cols, i) => ({
      yX: requireNumber(file, `row ${i + 1}/y_x`, Number(cols[0])),
      yY: requireNumber(file, `row ${i + 1}/y_y`, Number(cols[1])),
      s: requireNumber(file, `row ${i + 1}/s`, Number(cols[2])),
      thetaStar: requireNumber(file, `row ${i + 1}/theta_star`, Number(cols[3])),
      staticScore: requireNumber(file, `row ${i + 1}/static_score`, Number(cols[4])),
      label: cols[5],
      dimension: requireNumber(file, `row ${i + 1}/D`, Number(cols[6])),
    }),
  );
}
