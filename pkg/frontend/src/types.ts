// Payload types for the workbench /v1 API.  All geometry is integer dbu;
// the client never regenerates or rescales geometry, it only renders what
// the service sent.

export interface LayerInfo {
  name: string;
  gds_layer: number;
  gds_datatype: number;
  purpose: string;
}

export interface RectShape {
  kind: "rect";
  layer: string;
  rect: [number, number, number, number];
  net?: string;
}

export interface PolygonShape {
  kind: "polygon";
  layer: string;
  points: [number, number][];
  net?: string;
}

export interface RingShape {
  kind: "ring";
  layer: string;
  outer: [number, number][];
  hole: [number, number][];
  net?: string;
}

export interface PathShape {
  kind: "path";
  layer: string;
  points: [number, number][];
  width: number;
  net?: string;
}

export type ShapePayload = RectShape | PolygonShape | RingShape | PathShape;

export interface HandlePayload {
  name: string;
  parameter: string;
  location: string;
  direction: "EAST_WEST" | "NORTH_SOUTH";
  stretch_type: string;
  min_val: number;
  max_val: number;
  snap_res: number;
  x: number;
  y: number;
}

export interface DeviceParamsPayload {
  device: string;
  l: number;
  w: number;
  wtot: number;
  fingers: number;
  multiplier: number;
  guard_ring: string;
  bends: number;
}

export interface CellPayload {
  cell_id: string;
  name: string;
  device: string | null;
  params: DeviceParamsPayload | null;
  shapes: ShapePayload[];
  pins: Record<string, number[]>;
  connection_kind: Record<string, string>;
  handles: HandlePayload[];
  bbox: [number, number, number, number];
}

export interface InstancePayload {
  instance_id: string;
  cell_name: string;
  params: DeviceParamsPayload | null;
  x: number;
  y: number;
  rotation: number;
  mirror_x: boolean;
  abutted_with: string | null;
  pin_nets: Record<string, string>;
  shapes: ShapePayload[];
  bbox: [number, number, number, number];
}

export interface AbutResponse {
  case: string;
  pin_degree: number;
  a: InstancePayload;
  b: InstancePayload;
}

export interface ViolationPayload {
  rule: { kind: string; layers: string[]; value: number };
  shapes: string[];
  measured: number;
  location: [number, number];
}

export interface FlylinePayload {
  net: string;
  from: [number, number];
  to: [number, number];
}
