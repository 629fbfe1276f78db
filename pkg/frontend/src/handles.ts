// Drag state machines.  Pointer positions arrive in world (dbu) coordinates;
// the caller owns the screen-to-world mapping.  Nothing here talks to the
// service: a finished drag yields the request the controller should send,
// so the "exactly one call per release" rule is enforced by construction.

import type { HandlePayload, InstancePayload } from "./types.js";

export interface StretchRequest {
  handle: string;
  dx: number;
  dy: number;
}

export class HandleDrag {
  private x0 = 0;
  private y0 = 0;
  private dx = 0;
  private dy = 0;

  constructor(readonly handle: HandlePayload) {}

  start(x: number, y: number): void {
    this.x0 = x;
    this.y0 = y;
    this.dx = 0;
    this.dy = 0;
  }

  move(x: number, y: number): void {
    this.dx = Math.round(x - this.x0);
    this.dy = Math.round(y - this.y0);
  }

  /** Drag component along the handle axis; the orthogonal part is ignored. */
  projected(): { dx: number; dy: number } {
    return this.handle.direction === "EAST_WEST"
      ? { dx: this.dx, dy: 0 }
      : { dx: 0, dy: this.dy };
  }

  /** Null when the projected delta is zero: no parameter change, no call. */
  release(x: number, y: number): StretchRequest | null {
    this.move(x, y);
    const { dx, dy } = this.projected();
    if (dx === 0 && dy === 0) return null;
    return { handle: this.handle.name, dx, dy };
  }
}

export interface MoveRequest {
  instanceId: string;
  x: number;
  y: number;
}

export class InstanceDrag {
  private grabX = 0;
  private grabY = 0;
  private curX: number;
  private curY: number;

  constructor(readonly instance: InstancePayload) {
    this.curX = instance.x;
    this.curY = instance.y;
  }

  start(x: number, y: number): void {
    this.grabX = x - this.instance.x;
    this.grabY = y - this.instance.y;
  }

  move(x: number, y: number): void {
    this.curX = Math.round(x - this.grabX);
    this.curY = Math.round(y - this.grabY);
  }

  /** Preview offset for the in-flight drag (view-level translate only). */
  delta(): { dx: number; dy: number } {
    return { dx: this.curX - this.instance.x, dy: this.curY - this.instance.y };
  }

  release(x: number, y: number): MoveRequest {
    this.move(x, y);
    return { instanceId: this.instance.instance_id, x: this.curX, y: this.curY };
  }
}
