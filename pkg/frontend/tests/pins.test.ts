import { describe, expect, it } from "vitest";
import {
  globToRegExp,
  matchUnits,
  pinPackageDrafts,
  toDocuments,
  validateDrafts,
  type DraftPin,
} from "../src/pins";

const UNITS = ["m0.T00", "m0.T01", "m1.T02", "m1.T03", "m2.T04"];

function draft(
  pattern: string,
  target: { package?: number; layer?: number },
  label = pattern,
): DraftPin {
  return { pattern, ...target, label };
}

describe("globToRegExp", () => {
  // Expectations frozen against Python's fnmatchcase, which is what the
  // service applies to the same patterns server-side.
  it("matches like fnmatchcase", () => {
    expect(globToRegExp("m3.T17").test("m3.T17")).toBe(true);
    expect(globToRegExp("m3.T17").test("m3.T18")).toBe(false);
    expect(globToRegExp("m3.*").test("m3.T17")).toBe(true);
    expect(globToRegExp("m3.*").test("m13.T17")).toBe(false);
    expect(globToRegExp("*.T0?").test("m2.T05")).toBe(true);
    expect(globToRegExp("*.T0?").test("m2.T5")).toBe(false);
    expect(globToRegExp("m[12].T*").test("m2.T9")).toBe(true);
    expect(globToRegExp("m[12].T*").test("m3.T9")).toBe(false);
    expect(globToRegExp("m[!12].*").test("m3.x")).toBe(true);
    expect(globToRegExp("m[!12].*").test("m1.x")).toBe(false);
    expect(globToRegExp("a[b").test("a[b")).toBe(true);
    expect(globToRegExp("a[b").test("ab")).toBe(false);
    expect(globToRegExp("*").test("anything.at.all")).toBe(true);
    expect(globToRegExp("m?.T1[0-5]").test("m4.T13")).toBe(true);
    expect(globToRegExp("m?.T1[0-5]").test("m4.T16")).toBe(false);
    expect(globToRegExp("mX.T17").test("mXaT17")).toBe(false);
    // a leading caret in a class is a literal character, not negation
    expect(globToRegExp("m[^3].x").test("m^.x")).toBe(true);
    expect(globToRegExp("m[^3].x").test("m1.x")).toBe(false);
  });

  it("resolves patterns to unit indices", () => {
    expect(matchUnits("m1.*", UNITS)).toEqual([2, 3]);
    expect(matchUnits("m0.T01", UNITS)).toEqual([1]);
    expect(matchUnits("nothing", UNITS)).toEqual([]);
  });
});

describe("validateDrafts", () => {
  it("accepts a consistent draft set", () => {
    const drafts = [
      ...pinPackageDrafts(2, 1, ["m0.T00", "m0.T01"]),
      draft("m1.T02", { package: 3 }),
    ];
    expect(validateDrafts(drafts, UNITS)).toBeNull();
  });

  it("accepts duplicated pins with identical targets", () => {
    const drafts = [
      draft("m0.T00", { package: 2, layer: 1 }),
      draft("m0.T00", { package: 2, layer: 1 }),
    ];
    expect(validateDrafts(drafts, UNITS)).toBeNull();
  });

  it("rejects one unit pinned to two packages", () => {
    const first = draft("m0.*", { package: 1 }, "a");
    const second = draft("m0.T01", { package: 4 }, "b");
    const conflict = validateDrafts([first, second], UNITS);
    expect(conflict).not.toBeNull();
    expect(conflict!.message).toContain("m0.T01");
    expect(conflict!.first).toBe(first);
    expect(conflict!.second).toBe(second);
  });

  it("rejects one slot pinned to two layers", () => {
    const conflict = validateDrafts(
      [
        draft("m0.T00", { package: 2, layer: 0 }),
        draft("m1.T02", { package: 2, layer: 1 }),
      ],
      UNITS,
    );
    expect(conflict).not.toBeNull();
    expect(conflict!.message).toContain("package 2");
  });

  it("rejects layer-only pins that disagree", () => {
    const conflict = validateDrafts(
      [draft("m0.T00", { layer: 0 }), draft("m1.T02", { layer: 2 })],
      UNITS,
    );
    expect(conflict).not.toBeNull();
    expect(conflict!.message).toContain("could collide");
  });

  it("rejects a layer-only pin against a differently pinned package", () => {
    const conflict = validateDrafts(
      [
        draft("m0.T00", { layer: 0 }),
        draft("m1.T02", { package: 3, layer: 2 }),
      ],
      UNITS,
    );
    expect(conflict).not.toBeNull();
    expect(conflict!.message).toContain("layer 2");
  });

  it("flags patterns that match nothing", () => {
    const conflict = validateDrafts([draft("ghost.*", { package: 0 })], UNITS);
    expect(conflict).not.toBeNull();
    expect(conflict!.message).toContain("matches no known unit");
  });

  it("flags pins without any target", () => {
    const conflict = validateDrafts([draft("m0.T00", {})], UNITS);
    expect(conflict).not.toBeNull();
    expect(conflict!.message).toContain("no package or layer target");
  });
});

describe("draft wire form", () => {
  it("strips labels and keeps targets", () => {
    const drafts = [draft("m2.T04", { package: 5, layer: 2 }, "x")];
    expect(toDocuments(drafts)).toEqual([
      { pattern: "m2.T04", package: 5, layer: 2 },
    ]);
  });

  it("pin-package affordance pins every member and the slot layer", () => {
    const drafts = pinPackageDrafts(3, 1, ["a", "b"]);
    expect(drafts).toHaveLength(2);
    expect(drafts.every((d) => d.package === 3 && d.layer === 1)).toBe(true);
    expect(drafts.map((d) => d.pattern)).toEqual(["a", "b"]);
  });
});
