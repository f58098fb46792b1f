/** Model presets and the banner line shown once a session is created. */

import type { ModelSpec, ModelSummary } from "./types.js";

export interface PresetField {
  name: string;
  label: string;
  placeholder: string;
}

export const PRESETS: Record<string, { label: string; fields: PresetField[] }> = {
  secretary: {
    label: "Secretary (records among n candidates)",
    fields: [{ name: "n", label: "candidates", placeholder: "10" }],
  },
  dice: {
    label: "Dice (last six among n throws)",
    fields: [
      { name: "n", label: "throws", placeholder: "10" },
      { name: "faces", label: "faces", placeholder: "6" },
    ],
  },
  "explicit-odds": {
    label: "Explicit success probabilities",
    fields: [{ name: "probs", label: "probabilities", placeholder: "0.5, 0.4, 0.3" }],
  },
  empirical: {
    label: "Unknown odds (empirical plug-in)",
    fields: [{ name: "n", label: "horizon", placeholder: "10" }],
  },
};

/** Build a ModelSpec from raw form values; returns an error string instead
 * of a spec when the form is invalid. */
export function buildModel(
  kind: string,
  values: Record<string, string>,
): ModelSpec | string {
  const positiveInt = (raw: string | undefined, label: string): number | string => {
    const parsed = Number(raw);
    if (!Number.isInteger(parsed) || parsed < 1) {
      return `${label} must be a positive integer`;
    }
    return parsed;
  };
  if (kind === "secretary" || kind === "empirical") {
    const n = positiveInt(values.n, "candidate count");
    if (typeof n === "string") return n;
    return { kind, n } as ModelSpec;
  }
  if (kind === "dice") {
    const n = positiveInt(values.n, "throw count");
    if (typeof n === "string") return n;
    const faces = positiveInt(values.faces || "6", "face count");
    if (typeof faces === "string") return faces;
    if (faces < 2) return "face count must be at least 2";
    return { kind, n, faces };
  }
  if (kind === "explicit-odds") {
    const raw = (values.probs ?? "").split(",").map((piece) => piece.trim()).filter(Boolean);
    if (raw.length === 0) return "give at least one probability";
    const probs = raw.map(Number);
    if (probs.some((p) => !Number.isFinite(p) || p < 0 || p > 1)) {
      return "probabilities must be numbers in [0, 1]";
    }
    return { kind, probs };
  }
  return `unknown model kind ${kind}`;
}

/** One-line guidance banner derived from the service's model summary. */
export function banner(summary: ModelSummary): string {
  if (summary.threshold === undefined) {
    return "guidance adapts as observations accumulate";
  }
  if (summary.kind === "secretary") {
    return summary.threshold > 1
      ? `observe freely through candidate ${summary.threshold - 1}`
      : "every record is worth taking";
  }
  if (summary.kind === "dice") {
    return `act from throw ${summary.threshold}`;
  }
  return `stopping window opens at index ${summary.threshold}`;
}
