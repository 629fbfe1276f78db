// Browser entry point: DOM wiring around the pure scene/controller core.

import { WorkbenchClient } from "./api.js";
import { Studio, StudioState } from "./controller.js";
import { HandleDrag, InstanceDrag } from "./handles.js";
import { renderScene, toSvg } from "./scene.js";
import type { HandlePayload, InstancePayload } from "./types.js";

const client = new WorkbenchClient("");
const svg = document.getElementById("canvas") as unknown as SVGSVGElement;
const statusBar = document.getElementById("status")!;
const readout = document.getElementById("readout")!;

let viewBox = { x: -20000, y: -20000, w: 80000, h: 60000 };

function applyViewBox(): void {
  svg.setAttribute("viewBox",
    `${viewBox.x} ${-viewBox.y - viewBox.h} ${viewBox.w} ${viewBox.h}`);
}

function fitTo(bbox: [number, number, number, number]): void {
  const [x0, y0, x1, y1] = bbox;
  const margin = Math.max((x1 - x0) * 0.15, 2000);
  viewBox = {
    x: x0 - margin, y: y0 - margin,
    w: x1 - x0 + 2 * margin, h: y1 - y0 + 2 * margin,
  };
  applyViewBox();
}

function render(state: StudioState): void {
  svg.innerHTML = toSvg(renderScene(state, Math.max(viewBox.w / 200, 50)));
  statusBar.textContent = state.status;
  const p = state.cell?.params;
  readout.textContent = p
    ? `${p.device}  l=${p.l / 1000}u  w=${p.w / 1000}u  wtot=${p.wtot / 1000}u  ` +
      `fingers=${p.fingers}  m=${p.multiplier}`
    : "";
}

const studio = new Studio(client, render);

function toWorld(event: MouseEvent): { x: number; y: number } {
  const pt = svg.createSVGPoint();
  pt.x = event.clientX;
  pt.y = event.clientY;
  const ctm = svg.getScreenCTM();
  const p = ctm ? pt.matrixTransform(ctm.inverse()) : pt;
  return { x: p.x, y: -p.y }; // scene group is y-flipped
}

let handleDrag: HandleDrag | null = null;
let instanceDrag: InstanceDrag | null = null;
let dragGroup: SVGGElement | null = null;

svg.addEventListener("pointerdown", event => {
  const target = event.target as SVGElement;
  const world = toWorld(event);
  const handleName = target.getAttribute("data-handle");
  if (handleName && studio.state.cell) {
    const handle = studio.state.cell.handles.find(
      (h: HandlePayload) => h.name === handleName);
    if (handle) {
      handleDrag = new HandleDrag(handle);
      handleDrag.start(world.x, world.y);
      svg.setPointerCapture(event.pointerId);
      return;
    }
  }
  const group = target.closest("[data-instance]") as SVGGElement | null;
  if (group) {
    const id = group.getAttribute("data-instance")!;
    const inst = studio.state.instances.find(
      (i: InstancePayload) => i.instance_id === id);
    if (inst) {
      instanceDrag = new InstanceDrag(inst);
      instanceDrag.start(world.x, world.y);
      dragGroup = group;
      svg.setPointerCapture(event.pointerId);
    }
  }
});

svg.addEventListener("pointermove", event => {
  const world = toWorld(event);
  if (instanceDrag && dragGroup) {
    instanceDrag.move(world.x, world.y);
    const { dx, dy } = instanceDrag.delta();
    dragGroup.setAttribute("transform", `translate(${dx} ${-dy})`);
  } else if (handleDrag) {
    handleDrag.move(world.x, world.y);
    const { dx, dy } = handleDrag.projected();
    statusBar.textContent = `drag ${handleDrag.handle.name}: ` +
      `${((dx || dy) / 1000).toFixed(3)} um`;
  }
});

svg.addEventListener("pointerup", event => {
  const world = toWorld(event);
  if (handleDrag) {
    const request = handleDrag.release(world.x, world.y);
    handleDrag = null;
    void studio.releaseHandle(request);
  } else if (instanceDrag) {
    const request = instanceDrag.release(world.x, world.y);
    instanceDrag = null;
    dragGroup = null;
    void studio.releaseInstance(request);
  }
});

svg.addEventListener("wheel", event => {
  event.preventDefault();
  const factor = event.deltaY > 0 ? 1.2 : 1 / 1.2;
  const world = toWorld(event);
  viewBox = {
    x: world.x - (world.x - viewBox.x) * factor,
    y: world.y - (world.y - viewBox.y) * factor,
    w: viewBox.w * factor,
    h: viewBox.h * factor,
  };
  applyViewBox();
  render(studio.state);
});

function numberOr(id: string, fallback: number): number {
  const value = Number((document.getElementById(id) as HTMLInputElement).value);
  return Number.isFinite(value) && value > 0 ? value : fallback;
}

document.getElementById("generate")!.addEventListener("click", () => {
  const device = (document.getElementById("device") as HTMLSelectElement).value;
  const params: Record<string, number | string> = {
    l: Math.round(numberOr("param-l", 1) * 1000),
    w: Math.round(numberOr("param-w", 5) * 1000),
  };
  if (device === "pmos20t") {
    params.fingers = Math.round(numberOr("param-fingers", 2));
    const guard = (document.getElementById("param-guard") as HTMLSelectElement).value;
    params.guard_ring = guard;
    params.multiplier = Math.round(numberOr("param-mult", 1));
  }
  if (device === "respoly") params.bends = Math.round(numberOr("param-bends", 0));
  void studio.generate(device, params).then(() => {
    if (studio.state.cell) fitTo(studio.state.cell.bbox);
    render(studio.state);
  });
});

document.getElementById("place")!.addEventListener("click", () => {
  const netsRaw = (document.getElementById("nets") as HTMLInputElement).value.trim();
  const nets: Record<string, string> = {};
  if (netsRaw) {
    for (const part of netsRaw.split(/[,\s]+/)) {
      const [pin, net] = part.split("=");
      if (pin && net) nets[pin] = net;
    }
  }
  void studio.place(Math.round(viewBox.x + viewBox.w / 2),
                    Math.round(viewBox.y + viewBox.h / 2), nets).then(() => {
    const all = studio.state.instances;
    if (all.length) {
      fitTo([Math.min(...all.map(i => i.bbox[0])), Math.min(...all.map(i => i.bbox[1])),
             Math.max(...all.map(i => i.bbox[2])), Math.max(...all.map(i => i.bbox[3]))]);
      render(studio.state);
    }
  });
});

document.getElementById("drc")!.addEventListener("click", () => {
  void studio.refreshOverlays();
});

document.getElementById("schematic-load")!.addEventListener("click", () => {
  const text = (document.getElementById("schematic") as HTMLTextAreaElement).value;
  void studio.loadSchematic(text);
});

document.getElementById("download")!.addEventListener("click", () => {
  window.open(client.gdsUrl(), "_blank");
});

applyViewBox();
render(studio.state);
