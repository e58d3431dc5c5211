import { axisScale } from "./parcoords";
import type { FilterSolution, ObjectiveName } from "./types";

const SVG_NS = "http://www.w3.org/2000/svg";
const SIZE = 300;
const PAD = 36;

/**
 * Two-objective scatter for pairwise trade-off study. The user picks both
 * axes; points are the same service-filtered solutions the parallel
 * coordinates show.
 */
export class Scatter {
  private svg: SVGSVGElement;
  private xSelect: HTMLSelectElement;
  private ySelect: HTMLSelectElement;
  private names: ObjectiveName[] = [];
  private lastArgs: {
    front: number[][];
    visible: FilterSolution[];
    selectedRef: string | null;
  } | null = null;

  constructor(
    container: HTMLElement,
    private readonly onSelect: (ref: string) => void,
  ) {
    const controls = document.createElement("div");
    controls.className = "scatter-controls";
    this.xSelect = document.createElement("select");
    this.ySelect = document.createElement("select");
    this.xSelect.setAttribute("data-role", "scatter-x");
    this.ySelect.setAttribute("data-role", "scatter-y");
    controls.append("x: ", this.xSelect, " y: ", this.ySelect);
    container.appendChild(controls);

    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("class", "scatter");
    this.svg.setAttribute("viewBox", `0 0 ${SIZE} ${SIZE}`);
    this.svg.setAttribute("width", String(SIZE));
    this.svg.setAttribute("height", String(SIZE));
    container.appendChild(this.svg);

    const redraw = () => {
      if (this.lastArgs) {
        const { front, visible, selectedRef } = this.lastArgs;
        this.draw(front, visible, selectedRef);
      }
    };
    this.xSelect.addEventListener("change", redraw);
    this.ySelect.addEventListener("change", redraw);
  }

  setObjectives(names: ObjectiveName[]): void {
    if (names.join() === this.names.join()) return;
    this.names = names;
    for (const select of [this.xSelect, this.ySelect]) {
      select.replaceChildren();
      for (const name of names) {
        const option = document.createElement("option");
        option.value = name;
        option.textContent = name;
        select.appendChild(option);
      }
    }
    // Default to the two conformance objectives when present.
    this.xSelect.value = names.includes("violations") ? "violations" : names[0];
    this.ySelect.value = names.includes("cyclic_edges") ? "cyclic_edges" : names[1];
  }

  render(
    front: number[][],
    visible: FilterSolution[],
    selectedRef: string | null,
  ): void {
    this.lastArgs = { front, visible, selectedRef };
    this.draw(front, visible, selectedRef);
  }

  private draw(
    front: number[][],
    visible: FilterSolution[],
    selectedRef: string | null,
  ): void {
    const xi = this.names.indexOf(this.xSelect.value as ObjectiveName);
    const yi = this.names.indexOf(this.ySelect.value as ObjectiveName);
    this.svg.replaceChildren();
    if (xi < 0 || yi < 0) return;

    let xMin = Infinity;
    let xMax = -Infinity;
    let yMin = Infinity;
    let yMax = -Infinity;
    for (const row of front) {
      xMin = Math.min(xMin, row[xi]);
      xMax = Math.max(xMax, row[xi]);
      yMin = Math.min(yMin, row[yi]);
      yMax = Math.max(yMax, row[yi]);
    }
    if (!isFinite(xMin)) return;
    const sy = axisScale(yMin, yMax, PAD, SIZE - PAD);
    const sxInverted = axisScale(xMin, xMax, PAD, SIZE - PAD);
    const sx = (v: number) => SIZE - sxInverted.toPixel(v);

    const frame = document.createElementNS(SVG_NS, "rect");
    frame.setAttribute("class", "frame");
    frame.setAttribute("x", String(PAD));
    frame.setAttribute("y", String(PAD));
    frame.setAttribute("width", String(SIZE - 2 * PAD));
    frame.setAttribute("height", String(SIZE - 2 * PAD));
    frame.setAttribute("fill", "none");
    this.svg.appendChild(frame);

    for (const solution of visible) {
      const dot = document.createElementNS(SVG_NS, "circle");
      dot.setAttribute("cx", sx(solution.objectives[xi]).toFixed(2));
      dot.setAttribute("cy", sy.toPixel(solution.objectives[yi]).toFixed(2));
      dot.setAttribute("r", solution.ref === selectedRef ? "5" : "3");
      dot.setAttribute("data-ref", solution.ref);
      dot.setAttribute(
        "class",
        solution.ref === selectedRef ? "dot selected" : "dot",
      );
      dot.addEventListener("click", () => this.onSelect(solution.ref));
      this.svg.appendChild(dot);
    }
  }

  renderedRefs(): string[] {
    const refs: string[] = [];
    this.svg.querySelectorAll("circle.dot").forEach((node) => {
      refs.push(node.getAttribute("data-ref") ?? "");
    });
    return refs;
  }
}
