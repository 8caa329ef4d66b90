/** Pure formatting of service results for the sidebar panel.
 *
 * Values are rendered verbatim (String(v), no rounding, no arithmetic), so
 * the displayed text is exactly what the service reported. */

import type { FitEntry } from "./types.js";

export function formatFitPanel(fits: Record<string, FitEntry>): string[] {
  const lines: string[] = [];
  for (const [model, entry] of Object.entries(fits)) {
    lines.push(`${model}: ${entry.status}`);
    if (entry.result) {
      for (const [k, v] of Object.entries(entry.result.params)) {
        lines.push(`  ${k} = ${v}`);
      }
      lines.push(`  rms_GHz = ${entry.result.rms_GHz}`);
    }
    if (entry.message) lines.push(`  ${entry.message}`);
  }
  return lines;
}
