"""Single-user editing session: cells, placed instances, undo journal.

Every mutation appends one journal entry; replaying the journal onto a fresh
session reproduces the design bit-exactly.  Requests are serialized by the
service; the session itself is single-writer.
"""

from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path

from .. import gdsio, interact, pcell, verify
from ..errors import CellforgeError, ParseError
from ..geometry import Point, Rect, Transform, apply_transform, bbox
from ..interact import PlacedInstance, handle_anchor
from ..techdb import TechnologyData


class Session:
    def __init__(self, tech: TechnologyData):
        self.tech = tech
        self.cells: dict[str, pcell.CellLayout] = {}
        self.design: list[PlacedInstance] = []
        self.schematic: verify.Netlist | None = None
        self.journal: list[dict] = []
        self._cell_seq = 0
        self._inst_seq = 0

    # --- mutations (journaled) ---------------------------------------------

    def create_cell(self, device: str, params: dict | None = None) -> str:
        params = params or {}
        raw = pcell.DeviceParams(device=device, **_param_fields(device, params, self.tech))
        evaluated = pcell.evaluate_params(raw, self.tech)
        cell = pcell.generate(evaluated, self.tech)
        self._cell_seq += 1
        cell_id = f"c{self._cell_seq}"
        self.cells[cell_id] = cell
        self.journal.append({"op": "create_cell", "device": device, "params": params})
        return cell_id

    def stretch_cell(self, cell_id: str, handle: str, dx: int, dy: int) -> str:
        cell = self._cell(cell_id)
        _, new_cell = interact.apply_stretch(cell, handle, (dx, dy), self.tech)
        self.cells[cell_id] = new_cell
        self.journal.append({"op": "stretch", "cell": cell_id, "handle": handle,
                             "dx": dx, "dy": dy})
        return cell_id

    def place(self, cell_id: str, x: int, y: int, nets: dict | None = None) -> str:
        cell = self._cell(cell_id)
        self._inst_seq += 1
        instance_id = f"i{self._inst_seq}"
        self.design.append(PlacedInstance(
            cell, Transform(translation=Point(x, y)), instance_id, dict(nets or {})))
        self.journal.append({"op": "place", "cell": cell_id, "x": x, "y": y,
                             "nets": dict(nets or {})})
        return instance_id

    def move(self, instance_id: str, x: int, y: int) -> None:
        inst = self._instance(instance_id)
        inst.transform = replace(inst.transform, translation=Point(x, y))
        self.journal.append({"op": "move", "instance": instance_id, "x": x, "y": y})

    def set_schematic(self, text: str) -> verify.Netlist:
        self.schematic = verify.parse_schematic(text)
        self.journal.append({"op": "schematic", "text": text})
        return self.schematic

    def abut(self, a_id: str, b_id: str) -> interact.AbutCase:
        a, b = self._instance(a_id), self._instance(b_id)
        degree = self.schematic.net_degree if self.schematic else None
        case = interact.detect_abutment(a, b, net_degree=degree)
        if case.is_abut:
            interact.apply_abutment(a, b, case, self.tech)
        self.journal.append({"op": "abut", "a": a_id, "b": b_id})
        return case

    def unabut(self, a_id: str, b_id: str) -> None:
        interact.undo_abutment(self._instance(a_id), self._instance(b_id))
        self.journal.append({"op": "unabut", "a": a_id, "b": b_id})

    # --- queries --------------------------------------------------------------

    def drc(self) -> list[verify.Violation]:
        return verify.run_drc(self.design, self.tech)

    def flylines(self) -> list[verify.Flyline]:
        if self.schematic is None:
            return []
        return verify.compute_flylines(self.design, self.schematic, self.tech)

    def gds_bytes(self) -> bytes:
        return gdsio.write_gds_bytes(gdsio.export_design(self.design, self.tech))

    @classmethod
    def replay(cls, journal: list[dict], tech: TechnologyData) -> "Session":
        s = cls(tech)
        for entry in journal:
            op = entry["op"]
            if op == "create_cell":
                s.create_cell(entry["device"], entry["params"])
            elif op == "stretch":
                s.stretch_cell(entry["cell"], entry["handle"], entry["dx"], entry["dy"])
            elif op == "place":
                s.place(entry["cell"], entry["x"], entry["y"], entry["nets"])
            elif op == "move":
                s.move(entry["instance"], entry["x"], entry["y"])
            elif op == "schematic":
                s.set_schematic(entry["text"])
            elif op == "abut":
                s.abut(entry["a"], entry["b"])
            elif op == "unabut":
                s.unabut(entry["a"], entry["b"])
            else:
                raise CellforgeError(f"unknown journal op {op!r}")
        return s

    # --- payloads ----------------------------------------------------------------

    def cell_payload(self, cell_id: str) -> dict:
        cell = self._cell(cell_id)
        return {
            "cell_id": cell_id,
            "name": cell.name,
            "device": cell.params.device if cell.params else None,
            "params": _params_payload(cell.params),
            "shapes": [_shape_payload(s) for s in cell.shapes],
            "pins": {pin: [cell.shape_index(s) for s in members]
                     for pin, members in cell.pins.items()},
            "connection_kind": dict(cell.connection_kind),
            "handles": [_handle_payload(cell, h) for h in cell.handles],
            "bbox": _rect_payload(cell.bounds()),
        }

    def instance_payload(self, instance_id: str) -> dict:
        inst = self._instance(instance_id)
        t = inst.transform
        return {
            "instance_id": inst.instance_id,
            "cell_name": inst.cell.name,
            "params": _params_payload(inst.cell.params),
            "x": t.translation.x, "y": t.translation.y,
            "rotation": t.rotation, "mirror_x": t.mirror_x,
            "abutted_with": inst.abutted_with,
            "pin_nets": dict(inst.pin_nets),
            "shapes": [_shape_payload(apply_transform(s, t)) for s in inst.cell.shapes],
            "bbox": _rect_payload(inst.placed_bbox()),
        }

    def _cell(self, cell_id: str) -> pcell.CellLayout:
        try:
            return self.cells[cell_id]
        except KeyError:
            raise KeyError(f"unknown cell {cell_id!r}") from None

    def _instance(self, instance_id: str) -> PlacedInstance:
        for inst in self.design:
            if inst.instance_id == instance_id:
                return inst
        raise KeyError(f"unknown instance {instance_id!r}")


_PARAM_KEYS = ("l", "w", "wtot", "fingers", "multiplier", "guard_ring", "bends")


def _param_fields(device: str, params: dict, tech) -> dict:
    known = {}
    defaults = pcell.defaults(device, tech)
    for key in _PARAM_KEYS:
        if key in params:
            known[key] = params[key]
        elif key not in ("w", "wtot"):
            known[key] = getattr(defaults, key)
    if "w" not in known and "wtot" not in known:
        known["w"] = defaults.w
    unknown = set(params) - set(_PARAM_KEYS)
    if unknown:
        raise ParseError(f"unknown parameters: {', '.join(sorted(unknown))}")
    return known


def _params_payload(params) -> dict | None:
    if params is None:
        return None
    return {k: getattr(params, k) for k in ("device",) + _PARAM_KEYS}


def _rect_payload(r: Rect) -> list[int]:
    return [r.lo.x, r.lo.y, r.hi.x, r.hi.y]


def _shape_payload(shape) -> dict:
    from ..geometry import OctagonWithHole, Path, Polygon
    from ..geometry import Rect as GRect

    g = shape.geometry
    out: dict = {"layer": shape.layer}
    if shape.net:
        out["net"] = shape.net
    if isinstance(g, GRect):
        out["kind"] = "rect"
        out["rect"] = _rect_payload(g)
    elif isinstance(g, Polygon):
        out["kind"] = "polygon"
        out["points"] = [[p.x, p.y] for p in g.vertices]
    elif isinstance(g, OctagonWithHole):
        out["kind"] = "ring"
        out["outer"] = [[p.x, p.y] for p in g.outer.vertices]
        out["hole"] = [[p.x, p.y] for p in g.hole.vertices]
    elif isinstance(g, Path):
        out["kind"] = "path"
        out["points"] = [[p.x, p.y] for p in g.points]
        out["width"] = g.width
    return out


def _handle_payload(cell, h) -> dict:
    anchor = handle_anchor(cell, h)
    return {
        "name": h.name, "parameter": h.parameter, "location": h.location,
        "direction": h.direction, "stretch_type": h.stretch_type,
        "min_val": h.min_val, "max_val": h.max_val, "snap_res": h.snap_res,
        "x": anchor.x, "y": anchor.y,
    }


# --- design files ------------------------------------------------------------------

def load_design(source, tech: TechnologyData) -> list[PlacedInstance]:
    """Design JSON: instances with device params (dbu) plus raw straps."""
    if isinstance(source, (str, Path)):
        doc = json.loads(Path(source).read_text())
    else:
        doc = source
    design = []
    for entry in doc.get("instances", []):
        params = pcell.DeviceParams(
            device=entry["device"],
            **_param_fields(entry["device"], entry.get("params", {}), tech))
        cell = pcell.generate(pcell.evaluate_params(params, tech), tech)
        x, y = entry.get("at", [0, 0])
        design.append(PlacedInstance(
            cell, Transform(translation=Point(x, y), rotation=entry.get("rotation", 0),
                            mirror_x=entry.get("mirror_x", False)),
            entry["id"], dict(entry.get("nets", {}))))
    for k, entry in enumerate(doc.get("straps", [])):
        x0, y0, x1, y1 = entry["rect"]
        cell = pcell.strap(entry["layer"], Rect.from_bounds(x0, y0, x1, y1),
                           entry.get("net"))
        design.append(PlacedInstance(cell, Transform(), entry.get("id", f"strap{k}")))
    return design
