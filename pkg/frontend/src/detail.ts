import type { PackageDetail, SolutionDetail } from "./types";

export interface DetailOptions {
  onPin(slot: number, layer: number, unitNames: string[]): void;
}

function fmt(value: number | null): string {
  if (value === null) return "-";
  return Number.isInteger(value) ? String(value) : value.toFixed(3);
}

/**
 * Inspection panel for one solution: the layer diagram with packages grouped
 * per layer, a per-package metrics table, and the violation list. Clicking a
 * violation highlights both endpoint packages in the diagram; every package
 * box carries a "pin" button that hands its slot, layer, and members to the
 * pin draft.
 */
export class DetailPanel {
  private detail: SolutionDetail | null = null;

  constructor(
    private readonly container: HTMLElement,
    private readonly options: DetailOptions,
  ) {}

  showError(message: string): void {
    this.detail = null;
    this.container.replaceChildren();
    const err = document.createElement("p");
    err.className = "panel-error";
    err.textContent = message;
    this.container.appendChild(err);
  }

  clear(): void {
    this.detail = null;
    this.container.replaceChildren();
    const hint = document.createElement("p");
    hint.className = "hint";
    hint.textContent = "select a solution to inspect it";
    this.container.appendChild(hint);
  }

  render(detail: SolutionDetail): void {
    this.detail = detail;
    this.container.replaceChildren();

    const heading = document.createElement("h3");
    heading.textContent = `solution ${detail.ref}`;
    this.container.appendChild(heading);

    if (detail.violations.length === 0) {
      const badge = document.createElement("span");
      badge.className = "badge zero-violations";
      badge.textContent = "no layer violations";
      heading.appendChild(badge);
    }

    this.container.appendChild(this.layerDiagram(detail));
    this.container.appendChild(this.metricsTable(detail.packages));
    this.container.appendChild(this.violationList(detail));
  }

  private packageOwner(unitName: string): number | null {
    if (!this.detail) return null;
    for (const pkg of this.detail.packages) {
      if (pkg.units.includes(unitName)) return pkg.package;
    }
    return null;
  }

  private layerDiagram(detail: SolutionDetail): HTMLElement {
    const diagram = document.createElement("div");
    diagram.className = "layer-diagram";
    const layerCount = Math.max(...detail.package_to_layer) + 1;
    for (let layer = 0; layer < layerCount; layer++) {
      const row = document.createElement("div");
      row.className = "layer-row";
      row.setAttribute("data-layer", String(layer));
      const label = document.createElement("span");
      label.className = "layer-label";
      label.textContent = `L${layer}`;
      row.appendChild(label);
      for (const pkg of detail.packages) {
        if (pkg.layer !== layer) continue;
        row.appendChild(this.packageBox(pkg));
      }
      diagram.appendChild(row);
    }
    return diagram;
  }

  private packageBox(pkg: PackageDetail): HTMLElement {
    const box = document.createElement("div");
    box.className = "package-box";
    box.setAttribute("data-package", String(pkg.package));
    const name = document.createElement("span");
    name.textContent = `p${pkg.package} (${pkg.size})`;
    box.appendChild(name);
    const pin = document.createElement("button");
    pin.className = "pin-button";
    pin.textContent = "pin";
    pin.title = `pin package ${pkg.package} to layer ${pkg.layer}`;
    pin.addEventListener("click", () => {
      this.options.onPin(pkg.package, pkg.layer, pkg.units);
    });
    box.appendChild(pin);
    return box;
  }

  private metricsTable(packages: PackageDetail[]): HTMLElement {
    const table = document.createElement("table");
    table.className = "package-metrics";
    table.innerHTML =
      "<thead><tr><th>package</th><th>layer</th><th>size</th>" +
      "<th>cohesion</th><th>Ce</th><th>Ca</th><th>D</th></tr></thead>";
    const body = document.createElement("tbody");
    for (const pkg of packages) {
      const row = document.createElement("tr");
      row.innerHTML =
        `<td>p${pkg.package}</td><td>${pkg.layer}</td><td>${pkg.size}</td>` +
        `<td>${fmt(pkg.cohesion)}</td><td>${pkg.efferent}</td>` +
        `<td>${pkg.afferent}</td><td>${fmt(pkg.distance)}</td>`;
      body.appendChild(row);
    }
    table.appendChild(body);
    return table;
  }

  private violationList(detail: SolutionDetail): HTMLElement {
    const wrap = document.createElement("div");
    wrap.className = "violations";
    const heading = document.createElement("h4");
    heading.textContent = `violations (${detail.violations.length})`;
    wrap.appendChild(heading);
    const list = document.createElement("ul");
    for (const violation of detail.violations) {
      const item = document.createElement("li");
      item.className = "violation-row";
      item.textContent =
        `${violation.from} (L${violation.from_layer}) uses ` +
        `${violation.to} (L${violation.to_layer})`;
      item.addEventListener("click", () => {
        this.highlight([
          this.packageOwner(violation.from),
          this.packageOwner(violation.to),
        ]);
      });
      list.appendChild(item);
    }
    wrap.appendChild(list);
    return wrap;
  }

  private highlight(slots: Array<number | null>): void {
    this.container
      .querySelectorAll(".package-box.highlight")
      .forEach((box) => box.classList.remove("highlight"));
    for (const slot of slots) {
      if (slot === null) continue;
      const box = this.container.querySelector(
        `.package-box[data-package="${slot}"]`,
      );
      box?.classList.add("highlight");
    }
  }
}
