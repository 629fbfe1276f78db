// Canned payloads and a recording fake for the /v1 API.

import type {
  AbutResponse,
  CellPayload,
  HandlePayload,
  InstancePayload,
  ShapePayload,
} from "../src/types.js";

export function widthHandle(overrides: Partial<HandlePayload> = {}): HandlePayload {
  return {
    name: "width_handle_left",
    parameter: "wtot",
    location: "CENTER_LEFT",
    direction: "EAST_WEST",
    stretch_type: "relative",
    min_val: 0.4,
    max_val: 10000.0,
    snap_res: 0.005,
    x: 0,
    y: 1400,
    ...overrides,
  };
}

export function mosCell(wtot = 5000): CellPayload {
  const shapes: ShapePayload[] = [
    {
      kind: "ring", layer: "poly1",
      outer: [[400, 0], [6600, 0], [7000, 400], [7000, 2400], [6600, 2800],
              [400, 2800], [0, 2400], [0, 400]],
      hole: [[1000, 1000], [6000, 1000], [6000, 1800], [1000, 1800]],
    },
    { kind: "rect", layer: "diff", rect: [-1200, -1200, 8200, 0] },
    { kind: "rect", layer: "cont", rect: [3300, 1200, 3700, 1600] },
    { kind: "rect", layer: "met1", rect: [3150, 1050, 3850, 1750] },
    { kind: "rect", layer: "met1", rect: [-1000, -1150, 8000, -450] },
    { kind: "rect", layer: "met1", rect: [-4400, -4550, 8000, -3850] },
  ];
  return {
    cell_id: "c1",
    name: "pmos20t",
    device: "pmos20t",
    params: {
      device: "pmos20t", l: 1000, w: wtot, wtot, fingers: 1,
      multiplier: 1, guard_ring: "none", bends: 0,
    },
    shapes,
    pins: { G: [0], D: [2, 3], S: [4], B: [5] },
    connection_kind: { G: "weak_poly", S: "strong_metal",
                       D: "strong_metal", B: "strong_metal" },
    handles: [widthHandle(), widthHandle({
      name: "width_handle_right", location: "CENTER_RIGHT", x: 7000,
    })],
    bbox: [-1200, -1200, 8200, 2800],
  };
}

export function instance(id: string, x: number, wtot = 5000,
                         abuttedWith: string | null = null): InstancePayload {
  const cell = mosCell(wtot);
  return {
    instance_id: id,
    cell_name: "pmos20t",
    params: cell.params,
    x,
    y: 0,
    rotation: 0,
    mirror_x: false,
    abutted_with: abuttedWith,
    pin_nets: { S: "mid" },
    shapes: cell.shapes.map(s => offsetShape(s, x)),
    bbox: [cell.bbox[0] + x, cell.bbox[1], cell.bbox[2] + x, cell.bbox[3]],
  };
}

function offsetShape(shape: ShapePayload, dx: number): ShapePayload {
  const move = (pts: [number, number][]): [number, number][] =>
    pts.map(([x, y]) => [x + dx, y]);
  switch (shape.kind) {
    case "rect": {
      const [x0, y0, x1, y1] = shape.rect;
      return { ...shape, rect: [x0 + dx, y0, x1 + dx, y1] };
    }
    case "polygon":
      return { ...shape, points: move(shape.points) };
    case "ring":
      return { ...shape, outer: move(shape.outer), hole: move(shape.hole) };
    case "path":
      return { ...shape, points: move(shape.points) };
  }
}

export interface RecordedCall {
  method: string;
  path: string;
  body: unknown;
}

/** fetch stand-in: scripted responses plus a call log. */
export class FakeApi {
  calls: RecordedCall[] = [];
  private routes = new Map<string, (body: any) => unknown>();

  on(method: string, path: string, responder: (body: any) => unknown): void {
    this.routes.set(`${method} ${path}`, responder);
  }

  callsTo(method: string, path: string): RecordedCall[] {
    return this.calls.filter(c => c.method === method && c.path === path);
  }

  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    this.calls.push({ method, path: url, body });
    const responder = this.routes.get(`${method} ${url}`);
    if (!responder) {
      return new Response(JSON.stringify({ error: `no route ${method} ${url}` }),
                          { status: 404 });
    }
    return new Response(JSON.stringify(responder(body)), {
      status: 200,
      headers: { "Content-Type": "application/json" },
    });
  };
}

export function abutResponse(caseName: string, a: InstancePayload,
                             b: InstancePayload): AbutResponse {
  return { case: caseName, pin_degree: caseName === "NoAbut" ? 0 : 2, a, b };
}
