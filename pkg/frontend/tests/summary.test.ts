import { describe, expect, it } from "vitest";

import { rawToken, summaryCells, summaryText } from "../src/summary.js";
import type { RawReport } from "../src/api.js";

// a body the way the service serializes it, including a float whose JS
// round-trip would lose its textual form
const RAW =
  '{"session_id":"abc","reader_id":"r9","TR":25,"FR":31,"TS":19,"FS":25,"acc":0.44}';

const report: RawReport = { report: JSON.parse(RAW), raw: RAW };

describe("summary rendering", () => {
  it("lifts every figure byte-for-byte from the payload", () => {
    const cells = summaryCells(report);
    expect(cells).toEqual({ TR: "25", FR: "31", TS: "19", FS: "25", acc: "0.44" });
    // the accuracy string is exactly the serialized token, not a recomputation
    expect(RAW.includes(`"acc":${cells.acc}`)).toBe(true);
  });

  it("preserves long float representations exactly", () => {
    const raw = '{"TR":23,"FR":30,"TS":20,"FS":27,"acc":0.43000000000000005}';
    expect(rawToken(raw, "acc")).toBe("0.43000000000000005");
  });

  it("renders the confusion grid rows consistently", () => {
    const text = summaryText(report);
    expect(text).toContain("accuracy 0.44");
    expect(text).toContain("25");
    expect(text).toContain("31");
  });

  it("fails loudly when a field is missing", () => {
    expect(() => rawToken('{"TR":1}', "acc")).toThrow(/missing/);
  });
});
