import type { FilterQuery, FilterSolution, ObjectiveName } from "./types";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface AxisScale {
  toPixel(value: number): number;
  toValue(pixel: number): number;
}

/**
 * Linear axis mapping with the minimum at `bottom` (values are minimized,
 * so better sits lower). Degenerate ranges pin to the middle.
 */
export function axisScale(
  min: number,
  max: number,
  top: number,
  bottom: number,
): AxisScale {
  const span = max - min;
  return {
    toPixel(value: number): number {
      if (span <= 0) return (top + bottom) / 2;
      return bottom - ((value - min) / span) * (bottom - top);
    },
    toValue(pixel: number): number {
      if (span <= 0) return min;
      return min + ((bottom - pixel) / (bottom - top)) * span;
    },
  };
}

export interface ParcoordsOptions {
  onBrush(name: ObjectiveName, lower?: number, upper?: number): void;
  onSelect(ref: string): void;
}

const MARGIN = { top: 28, bottom: 16, left: 40, right: 40 };
const AXIS_GAP = 104;
const HEIGHT = 340;

interface BrushDrag {
  name: ObjectiveName;
  startY: number;
  lastY: number;
}

/**
 * Hand-rolled parallel coordinates over the eight objectives. One polyline
 * per solution the service returned for the active filter; dragging along
 * an axis edits that objective's bound and double-clicking the axis clears
 * it. The plot scales axes by the unfiltered front so brushing never
 * rescales what the user is looking at.
 */
export class ParallelCoordinates {
  private svg: SVGSVGElement;
  private drag: BrushDrag | null = null;
  private scales = new Map<string, AxisScale>();

  constructor(container: HTMLElement, private readonly options: ParcoordsOptions) {
    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("class", "parcoords");
    container.appendChild(this.svg);
  }

  render(
    names: ObjectiveName[],
    frontObjectives: number[][],
    visible: FilterSolution[],
    selectedRef: string | null,
    query: FilterQuery,
  ): void {
    const width = MARGIN.left + MARGIN.right + AXIS_GAP * (names.length - 1);
    this.svg.setAttribute("viewBox", `0 0 ${width} ${HEIGHT}`);
    this.svg.setAttribute("width", String(width));
    this.svg.setAttribute("height", String(HEIGHT));
    this.svg.replaceChildren();
    this.scales.clear();

    const top = MARGIN.top;
    const bottom = HEIGHT - MARGIN.bottom;
    for (let k = 0; k < names.length; k++) {
      let min = Infinity;
      let max = -Infinity;
      for (const row of frontObjectives) {
        if (row[k] < min) min = row[k];
        if (row[k] > max) max = row[k];
      }
      if (!isFinite(min)) {
        min = 0;
        max = 1;
      }
      this.scales.set(names[k], axisScale(min, max, top, bottom));
    }

    const lines = document.createElementNS(SVG_NS, "g");
    lines.setAttribute("class", "lines");
    for (const solution of visible) {
      const points = names
        .map((name, k) => {
          const x = MARGIN.left + k * AXIS_GAP;
          const y = this.scales.get(name)!.toPixel(solution.objectives[k]);
          return `${x},${y.toFixed(2)}`;
        })
        .join(" ");
      const line = document.createElementNS(SVG_NS, "polyline");
      line.setAttribute("points", points);
      line.setAttribute("data-ref", solution.ref);
      line.setAttribute(
        "class",
        solution.ref === selectedRef ? "line selected" : "line",
      );
      line.addEventListener("click", () => this.options.onSelect(solution.ref));
      lines.appendChild(line);
    }
    this.svg.appendChild(lines);

    for (let k = 0; k < names.length; k++) {
      this.svg.appendChild(this.renderAxis(names[k], k, top, bottom, query));
    }
  }

  private renderAxis(
    name: ObjectiveName,
    index: number,
    top: number,
    bottom: number,
    query: FilterQuery,
  ): SVGGElement {
    const x = MARGIN.left + index * AXIS_GAP;
    const scale = this.scales.get(name)!;
    const group = document.createElementNS(SVG_NS, "g");
    group.setAttribute("class", "axis");
    group.setAttribute("data-axis", name);

    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(x));
    line.setAttribute("x2", String(x));
    line.setAttribute("y1", String(top));
    line.setAttribute("y2", String(bottom));
    group.appendChild(line);

    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(x));
    label.setAttribute("y", String(top - 10));
    label.setAttribute("text-anchor", "middle");
    label.textContent = name;
    group.appendChild(label);

    const bound = query[name];
    if (bound && (bound.lower !== undefined || bound.upper !== undefined)) {
      const yHigh = scale.toPixel(bound.upper ?? scale.toValue(top));
      const yLow = scale.toPixel(bound.lower ?? scale.toValue(bottom));
      const rect = document.createElementNS(SVG_NS, "rect");
      rect.setAttribute("class", "brush");
      rect.setAttribute("x", String(x - 7));
      rect.setAttribute("width", "14");
      rect.setAttribute("y", String(Math.min(yHigh, yLow)));
      rect.setAttribute("height", String(Math.abs(yLow - yHigh)));
      group.appendChild(rect);
    }

    // Invisible widened hit area for brushing.
    const track = document.createElementNS(SVG_NS, "rect");
    track.setAttribute("class", "track");
    track.setAttribute("x", String(x - 10));
    track.setAttribute("width", "20");
    track.setAttribute("y", String(top));
    track.setAttribute("height", String(bottom - top));
    track.setAttribute("fill", "transparent");
    track.addEventListener("pointerdown", (ev) => {
      this.drag = { name, startY: ev.offsetY, lastY: ev.offsetY };
    });
    track.addEventListener("pointermove", (ev) => {
      if (this.drag && this.drag.name === name) this.drag.lastY = ev.offsetY;
    });
    track.addEventListener("pointerup", () => this.finishDrag(name));
    track.addEventListener("dblclick", () => {
      this.options.onBrush(name, undefined, undefined);
    });
    group.appendChild(track);
    return group;
  }

  private finishDrag(name: ObjectiveName): void {
    const drag = this.drag;
    this.drag = null;
    if (!drag || drag.name !== name) return;
    if (Math.abs(drag.lastY - drag.startY) < 3) return; // a click, not a brush
    const scale = this.scales.get(name);
    if (!scale) return;
    const a = scale.toValue(drag.startY);
    const b = scale.toValue(drag.lastY);
    this.options.onBrush(name, Math.min(a, b), Math.max(a, b));
  }

  /** Solution refs currently drawn, in document order. */
  renderedRefs(): string[] {
    const refs: string[] = [];
    this.svg.querySelectorAll("polyline.line").forEach((node) => {
      refs.push(node.getAttribute("data-ref") ?? "");
    });
    return refs;
  }
}
