import { beforeEach, describe, expect, it } from "vitest";
import { DetailPanel } from "../src/detail";
import type { SolutionDetail } from "../src/types";

const DETAIL: SolutionDetail = {
  ref: "r1:4",
  run: "r1",
  objective_names: ["violations"],
  objectives: [2],
  packages: [
    {
      package: 0,
      layer: 0,
      size: 2,
      cohesion: 1.5,
      efferent: 1,
      afferent: 0,
      distance: 0.25,
      units: ["a.A", "a.B"],
    },
    {
      package: 2,
      layer: 1,
      size: 1,
      cohesion: 1.0,
      efferent: 0,
      afferent: 1,
      distance: null,
      units: ["b.C"],
    },
  ],
  unit_to_package: [0, 0, 2],
  package_to_layer: [0, 0, 1],
  violations: [
    { from: "b.C", to: "a.A", from_layer: 1, to_layer: 0 },
  ],
  cyclic_package_edges: [],
};

let host: HTMLElement;
let pins: Array<[number, number, string[]]>;
let panel: DetailPanel;

beforeEach(() => {
  host = document.createElement("div");
  document.body.appendChild(host);
  pins = [];
  panel = new DetailPanel(host, {
    onPin: (slot, layer, units) => pins.push([slot, layer, units]),
  });
});

describe("DetailPanel", () => {
  it("groups packages by layer in the diagram", () => {
    panel.render(DETAIL);
    const rows = host.querySelectorAll(".layer-row");
    expect(rows).toHaveLength(2);
    expect(
      rows[0].querySelector(".package-box")!.getAttribute("data-package"),
    ).toBe("0");
    expect(
      rows[1].querySelector(".package-box")!.getAttribute("data-package"),
    ).toBe("2");
  });

  it("shows the zero-violation badge only when clean", () => {
    panel.render({ ...DETAIL, violations: [] });
    expect(host.querySelector(".badge.zero-violations")).not.toBeNull();
    panel.render(DETAIL);
    expect(host.querySelector(".badge.zero-violations")).toBeNull();
  });

  it("lists violations with both endpoint names and layers", () => {
    panel.render(DETAIL);
    const row = host.querySelector(".violation-row")!;
    expect(row.textContent).toContain("b.C");
    expect(row.textContent).toContain("a.A");
    expect(row.textContent).toContain("L1");
    expect(row.textContent).toContain("L0");
  });

  it("highlights both endpoint packages when a violation is clicked", () => {
    panel.render(DETAIL);
    (host.querySelector(".violation-row") as HTMLElement).click();
    const highlighted = [...host.querySelectorAll(".package-box.highlight")].map(
      (box) => box.getAttribute("data-package"),
    );
    expect(highlighted.sort()).toEqual(["0", "2"]);
  });

  it("hands slot, layer, and members to the pin affordance", () => {
    panel.render(DETAIL);
    const button = host.querySelector<HTMLButtonElement>(
      '.package-box[data-package="2"] .pin-button',
    )!;
    button.click();
    expect(pins).toEqual([[2, 1, ["b.C"]]]);
  });

  it("renders an error state for a missing solution", () => {
    panel.showError("no such solution r1:99");
    expect(host.querySelector(".panel-error")!.textContent).toContain("r1:99");
  });
});
