// Pure SVG scene construction: payloads in, a virtual node tree out.
// Every coordinate in the scene comes verbatim from a service payload;
// the client never regenerates geometry.

import { layerColor, layerRank } from "./palette.js";
import type {
  CellPayload,
  FlylinePayload,
  HandlePayload,
  InstancePayload,
  ShapePayload,
  ViolationPayload,
} from "./types.js";

export interface VNode {
  tag: string;
  attrs: Record<string, string | number>;
  children: VNode[];
}

export function el(tag: string, attrs: Record<string, string | number> = {},
                   children: VNode[] = []): VNode {
  return { tag, attrs, children };
}

function ringPath(points: [number, number][]): string {
  const [head, ...rest] = points;
  return `M ${head[0]} ${head[1]} ` + rest.map(p => `L ${p[0]} ${p[1]}`).join(" ") + " Z";
}

export function shapeNode(shape: ShapePayload, pin?: string): VNode {
  const attrs: Record<string, string | number> = {
    class: "shape",
    "data-layer": shape.layer,
    fill: layerColor(shape.layer),
    "fill-opacity": 0.55,
  };
  if (pin) attrs["data-pin"] = pin;
  if (shape.net) attrs["data-net"] = shape.net;
  switch (shape.kind) {
    case "rect": {
      const [x0, y0, x1, y1] = shape.rect;
      return el("path", { ...attrs, d: ringPath([[x0, y0], [x1, y0], [x1, y1], [x0, y1]]) });
    }
    case "polygon":
      return el("path", { ...attrs, d: ringPath(shape.points) });
    case "ring":
      return el("path", {
        ...attrs,
        d: ringPath(shape.outer) + " " + ringPath(shape.hole),
        "fill-rule": "evenodd",
      });
    case "path": {
      const [head, ...rest] = shape.points;
      const d = `M ${head[0]} ${head[1]} ` + rest.map(p => `L ${p[0]} ${p[1]}`).join(" ");
      return el("path", {
        ...attrs,
        d,
        fill: "none",
        stroke: layerColor(shape.layer),
        "stroke-opacity": 0.55,
        "stroke-width": shape.width,
      });
    }
  }
}

/** Diamond glyph marking a stretch handle on its governed shape. */
export function handleNode(handle: HandlePayload, size: number): VNode {
  const s = size;
  const d = `M ${handle.x} ${handle.y - s} L ${handle.x + s} ${handle.y} ` +
    `L ${handle.x} ${handle.y + s} L ${handle.x - s} ${handle.y} Z`;
  return el("path", {
    class: "handle",
    "data-handle": handle.name,
    "data-direction": handle.direction,
    d,
  });
}

function sortedShapes(shapes: ShapePayload[]): [ShapePayload, number][] {
  return shapes
    .map((s, i) => [s, i] as [ShapePayload, number])
    .sort((a, b) => layerRank(a[0].layer) - layerRank(b[0].layer));
}

function pinIndex(pins: Record<string, number[]>): Map<number, string> {
  const out = new Map<number, string>();
  for (const [pin, indices] of Object.entries(pins)) {
    for (const i of indices) out.set(i, pin);
  }
  return out;
}

export function renderCell(cell: CellPayload, handleSize = 250): VNode {
  const pins = pinIndex(cell.pins);
  const children = sortedShapes(cell.shapes).map(([s, i]) => shapeNode(s, pins.get(i)));
  for (const h of cell.handles) children.push(handleNode(h, handleSize));
  return el("g", { class: "cell", "data-cell": cell.cell_id }, children);
}

export function renderInstance(inst: InstancePayload): VNode {
  const attrs: Record<string, string | number> = {
    class: "instance",
    "data-instance": inst.instance_id,
  };
  if (inst.abutted_with) attrs["data-abutted-with"] = inst.abutted_with;
  return el("g", attrs, sortedShapes(inst.shapes).map(([s]) => shapeNode(s)));
}

export function violationNode(v: ViolationPayload, size: number): VNode {
  const [x, y] = v.location;
  return el("path", {
    class: "violation",
    "data-rule": v.rule.kind,
    d: `M ${x - size} ${y - size} L ${x + size} ${y + size} ` +
      `M ${x - size} ${y + size} L ${x + size} ${y - size}`,
  });
}

export function flylineNode(f: FlylinePayload): VNode {
  return el("line", {
    class: "flyline",
    "data-net": f.net,
    x1: f.from[0], y1: f.from[1], x2: f.to[0], y2: f.to[1],
  });
}

export interface SceneInput {
  cell: CellPayload | null;
  instances: InstancePayload[];
  violations: ViolationPayload[];
  flylines: FlylinePayload[];
}

/** The whole drawing: instances, the cell under edit, then overlays. */
export function renderScene(input: SceneInput, markerSize = 400): VNode {
  const children: VNode[] = input.instances.map(renderInstance);
  if (input.cell) children.push(renderCell(input.cell));
  children.push(...input.violations.map(v => violationNode(v, markerSize)));
  children.push(...input.flylines.map(flylineNode));
  // layout coordinates are y-up; flip once at the root
  return el("g", { class: "scene", transform: "scale(1,-1)" }, children);
}

export function toSvg(node: VNode): string {
  const attrs = Object.entries(node.attrs)
    .map(([k, v]) => ` ${k}="${String(v)}"`)
    .join("");
  if (node.children.length === 0) return `<${node.tag}${attrs}/>`;
  return `<${node.tag}${attrs}>` + node.children.map(toSvg).join("") + `</${node.tag}>`;
}

/** Every numeric coordinate mentioned anywhere in the tree (for tests). */
export function sceneCoordinates(node: VNode): number[] {
  const out: number[] = [];
  const visit = (n: VNode) => {
    for (const [k, v] of Object.entries(n.attrs)) {
      if (k === "d" && typeof v === "string") {
        for (const m of v.match(/-?\d+(\.\d+)?/g) ?? []) out.push(Number(m));
      } else if (["x1", "y1", "x2", "y2"].includes(k)) {
        out.push(Number(v));
      }
    }
    n.children.forEach(visit);
  };
  visit(node);
  return out;
}
