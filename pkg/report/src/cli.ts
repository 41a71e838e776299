#!/usr/bin/env node
/**
 * triodlab-report — figure generation from triodlab output files.
 *
 * Usage:
 *   report snapshots       --in traj.jsonl            --out fig.svg
 *   report density_profile --in density_profile.json [--strata strata.csv] --out fig.svg
 *   report decay_loglog    --in decay.json            --out fig.svg
 *   report junction_track  --in track.csv --holder holder.json --out fig.svg
 *
 * --provenance prints one line per drawn annotation with the input-file field
 * it came from and fails if any annotation lacks a source.
 */

import { readFileSync, writeFileSync } from "fs";

import {
  Figure,
  renderDecayLoglog,
  renderDensityProfile,
  renderJunctionTrack,
  renderSnapshots,
} from "./figures.js";
import {
  SchemaError,
  parseDecay,
  parseDensityProfile,
  parseHolder,
  parseStrataCsv,
  parseTrackCsv,
  parseTrajectory,
} from "./schemas.js";

export const FIGURE_KINDS = [
  "snapshots",
  "density_profile",
  "decay_loglog",
  "junction_track",
] as const;

interface Args {
  kind: string;
  inPath: string;
  outPath: string;
  holderPath?: string;
  strataPath?: string;
  provenance: boolean;
}

function parseArgs(argv: string[]): Args {
  if (argv.length === 0) {
    throw new Error(`usage: report <${FIGURE_KINDS.join("|")}> --in FILE --out FILE`);
  }
  const [kind, ...rest] = argv;
  if (!(FIGURE_KINDS as readonly string[]).includes(kind)) {
    throw new Error(`unknown figure kind '${kind}'; expected one of ${FIGURE_KINDS.join(", ")}`);
  }
  const args: Partial<Args> = { kind, provenance: false };
  for (let i = 0; i < rest.length; i++) {
    const flag = rest[i];
    switch (flag) {
      case "--in":
        args.inPath = rest[++i];
        break;
      case "--out":
        args.outPath = rest[++i];
        break;
      case "--holder":
        args.holderPath = rest[++i];
        break;
      case "--strata":
        args.strataPath = rest[++i];
        break;
      case "--provenance":
        args.provenance = true;
        break;
      default:
        throw new Error(`unknown flag '${flag}'`);
    }
  }
  if (!args.inPath || !args.outPath) {
    throw new Error("--in and --out are required");
  }
  return args as Args;
}

export function buildFigure(args: Args): Figure {
  const input = readFileSync(args.inPath, "utf8");
  switch (args.kind) {
    case "snapshots":
      return renderSnapshots(parseTrajectory(input, args.inPath), args.inPath);
    case "density_profile": {
      const profile = parseDensityProfile(input, args.inPath);
      if (args.strataPath) {
        const strata = parseStrataCsv(readFileSync(args.strataPath, "utf8"), args.strataPath);
        return renderDensityProfile(profile, args.inPath, strata, args.strataPath);
      }
      return renderDensityProfile(profile, args.inPath);
    }
    case "decay_loglog":
      return renderDecayLoglog(parseDecay(input, args.inPath), args.inPath);
    case "junction_track": {
      if (!args.holderPath) {
        throw new Error("junction_track needs --holder holder.json");
      }
      const rows = parseTrackCsv(input, args.inPath);
      const holder = parseHolder(readFileSync(args.holderPath, "utf8"), args.holderPath);
      return renderJunctionTrack(rows, args.inPath, holder, args.holderPath);
    }
    default:
      throw new Error(`unhandled figure kind '${args.kind}'`);
  }
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    return 1;
  }
  try {
    const figure = buildFigure(args);
    writeFileSync(args.outPath, figure.svg);
    if (args.provenance) {
      let ok = true;
      for (const ann of figure.annotations) {
        if (!ann.source || !ann.source.includes("#")) {
          console.error(`provenance violation: annotation '${ann.text}' has no source`);
          ok = false;
        } else {
          console.log(`provenance: ${ann.text}  <-  ${ann.source}`);
        }
      }
      if (!ok) return 1;
    }
    console.log(`wrote ${args.outPath} (${figure.annotations.length} annotations)`);
    return 0;
  } catch (e) {
    if (e instanceof SchemaError) {
      console.error(`error: ${e.message}`);
    } else {
      console.error(`error: ${(e as Error).message}`);
    }
    return 1;
  }
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.ts") || entry.endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
