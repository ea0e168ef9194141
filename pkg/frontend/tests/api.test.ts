import { describe, expect, it } from "vitest";

import { annotationUrl, chipUrl, parcelsUrl, statsUrl, timeseriesUrl } from "../src/api.js";

describe("url builders", () => {
  it("builds the fixed endpoints", () => {
    expect(parcelsUrl("")).toBe("/api/parcels");
    expect(statsUrl("")).toBe("/api/stats/photo-interpretation");
    expect(timeseriesUrl("", "P0001")).toBe("/api/parcels/P0001/timeseries");
    expect(annotationUrl("", "P0001")).toBe("/api/parcels/P0001/annotation");
  });

  it("prefixes an explicit base for cross-origin development", () => {
    expect(parcelsUrl("http://localhost:8080")).toBe("http://localhost:8080/api/parcels");
  });

  it("builds chip urls with date, layer and scale", () => {
    expect(chipUrl("", "P0001", "2023-07-16", "eomi2")).toBe(
      "/api/parcels/P0001/chip?date=2023-07-16&layer=eomi2&scale=16",
    );
    expect(chipUrl("", "P0001", "2023-07-16", "rgb", 4)).toContain("scale=4");
  });

  it("escapes awkward parcel ids", () => {
    expect(timeseriesUrl("", "p/1 2")).toBe("/api/parcels/p%2F1%202/timeseries");
  });
});
