// Studio state and the service round-trips behind each interaction.
// The state holds service payloads verbatim; rendering reads only from it.

import type { WorkbenchClient } from "./api.js";
import type { StretchRequest, MoveRequest } from "./handles.js";
import type {
  CellPayload,
  FlylinePayload,
  InstancePayload,
  ViolationPayload,
} from "./types.js";

export interface StudioState {
  cell: CellPayload | null;
  instances: InstancePayload[];
  violations: ViolationPayload[];
  flylines: FlylinePayload[];
  status: string;
}

export class Studio {
  state: StudioState = {
    cell: null,
    instances: [],
    violations: [],
    flylines: [],
    status: "ready",
  };

  constructor(
    private client: WorkbenchClient,
    private onRender: (state: StudioState) => void = () => {},
  ) {}

  private render(): void {
    this.onRender(this.state);
  }

  async generate(device: string, params: Record<string, number | string> = {}): Promise<void> {
    this.state.cell = await this.client.createCell(device, params);
    this.state.status = `generated ${device}`;
    this.render();
  }

  /** Release of a handle drag: at most one stretch call, re-render from response. */
  async releaseHandle(request: StretchRequest | null): Promise<void> {
    if (!request || !this.state.cell) {
      this.render();
      return;
    }
    this.state.cell = await this.client.stretch(
      this.state.cell.cell_id, request.handle, request.dx, request.dy);
    const p = this.state.cell.params;
    this.state.status = p
      ? `${request.handle}: wtot ${(p.wtot / 1000).toFixed(3)} um, l ${(p.l / 1000).toFixed(3)} um`
      : request.handle;
    this.render();
  }

  async place(x: number, y: number, nets: Record<string, string> = {}): Promise<void> {
    if (!this.state.cell) return;
    const inst = await this.client.place(this.state.cell.cell_id, x, y, nets);
    this.state.instances.push(inst);
    this.state.status = `placed ${inst.instance_id}`;
    this.render();
  }

  private replaceInstance(updated: InstancePayload): void {
    const i = this.state.instances.findIndex(
      x => x.instance_id === updated.instance_id);
    if (i >= 0) this.state.instances[i] = updated;
  }

  private nearestOther(inst: InstancePayload): InstancePayload | null {
    let best: InstancePayload | null = null;
    let bestDist = Infinity;
    const cx = (inst.bbox[0] + inst.bbox[2]) / 2;
    const cy = (inst.bbox[1] + inst.bbox[3]) / 2;
    for (const other of this.state.instances) {
      if (other.instance_id === inst.instance_id) continue;
      const ox = (other.bbox[0] + other.bbox[2]) / 2;
      const oy = (other.bbox[1] + other.bbox[3]) / 2;
      const d = Math.hypot(ox - cx, oy - cy);
      if (d < bestDist) {
        bestDist = d;
        best = other;
      }
    }
    return best;
  }

  /**
   * Release of an instance drag.  An abutted instance is released from its
   * partner first (restoring both originals), then moved, then offered to
   * its nearest neighbor; the service decides the abutment case.
   */
  async releaseInstance(request: MoveRequest): Promise<void> {
    const inst = this.state.instances.find(i => i.instance_id === request.instanceId);
    if (!inst) return;
    if (inst.abutted_with) {
      const restored = await this.client.unabut(inst.instance_id, inst.abutted_with);
      this.replaceInstance(restored.a);
      this.replaceInstance(restored.b);
    }
    const moved = await this.client.move(request.instanceId, request.x, request.y);
    this.replaceInstance(moved);
    const partner = this.nearestOther(moved);
    if (partner) {
      const result = await this.client.abut(moved.instance_id, partner.instance_id);
      this.replaceInstance(result.a);
      this.replaceInstance(result.b);
      this.state.status = result.case;
    } else {
      this.state.status = `moved ${moved.instance_id}`;
    }
    this.render();
  }

  async refreshOverlays(): Promise<void> {
    this.state.violations = await this.client.drc();
    this.state.flylines = await this.client.flylines();
    this.state.status = this.state.violations.length
      ? `${this.state.violations.length} DRC violation(s)`
      : "DRC clean";
    this.render();
  }

  async loadSchematic(text: string): Promise<void> {
    const info = await this.client.loadSchematic(text);
    this.state.status = `schematic: ${info.devices} devices`;
    this.render();
  }
}
