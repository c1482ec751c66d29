// Summary rendering: a confusion grid plus accuracy, every number lifted
// verbatim from the service's serialized report. The accuracy token is cut
// straight out of the raw JSON body so the displayed string is byte-identical
// to what the service sent: the client never recomputes statistics.

import type { RawReport } from "./api.js";

export interface SummaryCells {
  TR: string;
  FR: string;
  TS: string;
  FS: string;
  acc: string;
}

/** Extract the exact serialized token of a numeric field from a JSON body. */
export function rawToken(raw: string, field: string): string {
  const pattern = new RegExp(`"${field}"\\s*:\\s*(-?[0-9]+(?:\\.[0-9]+)?(?:[eE][-+]?[0-9]+)?)`);
  const match = pattern.exec(raw);
  if (!match) {
    throw new Error(`field ${field} missing from report payload`);
  }
  return match[1];
}

export function summaryCells(report: RawReport): SummaryCells {
  return {
    TR: rawToken(report.raw, "TR"),
    FR: rawToken(report.raw, "FR"),
    TS: rawToken(report.raw, "TS"),
    FS: rawToken(report.raw, "FS"),
    acc: rawToken(report.raw, "acc"),
  };
}

export function summaryText(report: RawReport): string {
  const c = summaryCells(report);
  return [
    "            called real   called synthetic",
    `actual real        ${c.TR.padStart(4)}   ${c.FS.padStart(4)}`,
    `actual synthetic   ${c.FR.padStart(4)}   ${c.TS.padStart(4)}`,
    `accuracy ${c.acc}`,
  ].join("\n");
}
