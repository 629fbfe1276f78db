"""Interactive semantics: stretch handles and auto-abutment.

A stretch translates a released drag into one parameter change and a full
regeneration; abutment detects facing instances, regenerates both with edge
variants on the joint side and snaps them flush.  Instances mutate only
through these operations; a design is confined to one writer at a time.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

from typing import TYPE_CHECKING

from .errors import IncompatibleCase, NotAbutted, UnknownHandle
from .geometry import DBU_PER_UM, Point, Rect, Transform, apply_transform, bbox, snap, um
from .techdb import TechnologyData

if TYPE_CHECKING:  # pcell imports this module's types; avoid the cycle at runtime
    from .pcell.cell import CellLayout
    from .pcell.params import DeviceParams

LOCATIONS = ("CENTER_LEFT", "CENTER_RIGHT", "TOP_CENTER", "BOTTOM_CENTER")
DIRECTIONS = ("EAST_WEST", "NORTH_SOUTH")
# dragging outward from the governed shape increases the parameter
_OUTWARD_SIGN = {"CENTER_LEFT": -1, "BOTTOM_CENTER": -1, "CENTER_RIGHT": 1, "TOP_CENTER": 1}


@dataclass(frozen=True, slots=True)
class StretchHandle:
    name: str
    shape_ref: int
    parameter: str
    location: str
    direction: str
    stretch_type: str = "relative"
    min_val: float = 0.0          # um
    max_val: float = math.inf     # um
    snap_res: float = 0.005       # um

    def __post_init__(self):
        if self.location not in LOCATIONS:
            raise ValueError(f"bad location {self.location!r}")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"bad direction {self.direction!r}")
        horizontal = self.location in ("CENTER_LEFT", "CENTER_RIGHT")
        if horizontal != (self.direction == "EAST_WEST"):
            raise ValueError(f"{self.location} inconsistent with {self.direction}")
        if self.min_val > self.max_val:
            raise ValueError("min_val > max_val")


def handle_anchor(cell: CellLayout, handle: StretchHandle) -> Point:
    """Diamond position on the governed shape."""
    b = bbox(cell.shapes[handle.shape_ref])
    cx, cy = b.center.x, b.center.y
    return {
        "CENTER_LEFT": Point(b.lo.x, cy),
        "CENTER_RIGHT": Point(b.hi.x, cy),
        "TOP_CENTER": Point(cx, b.hi.y),
        "BOTTOM_CENTER": Point(cx, b.lo.y),
    }[handle.location]


class AbutStyle(enum.Enum):
    DIFF_HALF = "DiffHalf"
    DIFF_EDGE_ABUT = "DiffEdgeAbut"
    DIFF_ABUT = "DiffAbut"
    CONTACT_EDGE_ABUT2 = "ContactEdgeAbut2"


@dataclass(frozen=True, slots=True)
class AbutCaseStyle:
    spacing: float                # um, residual joint gap after abutment
    left: AbutStyle
    right: AbutStyle


# case table from the MOS abutment definition; keys are (pin_degree, relation)
ABUT_CASE_NAMES = {
    (2, "Equal"): "Abut2PinEqual", (2, "Bigger"): "Abut2PinBigger",
    (2, "Smaller"): "Abut2PinSmaller", (3, "Equal"): "Abut3PinEqual",
    (3, "Bigger"): "Abut3PinBigger", (3, "Smaller"): "Abut3PinSmaller",
}

MOS_CASE_STYLES = {
    "Abut2PinEqual": AbutCaseStyle(0.0, AbutStyle.DIFF_HALF, AbutStyle.DIFF_HALF),
    "Abut2PinBigger": AbutCaseStyle(0.0, AbutStyle.DIFF_EDGE_ABUT, AbutStyle.DIFF_EDGE_ABUT),
    "Abut2PinSmaller": AbutCaseStyle(0.0, AbutStyle.DIFF_EDGE_ABUT, AbutStyle.DIFF_EDGE_ABUT),
    "Abut3PinEqual": AbutCaseStyle(0.0, AbutStyle.DIFF_ABUT, AbutStyle.CONTACT_EDGE_ABUT2),
    "Abut3PinBigger": AbutCaseStyle(0.0, AbutStyle.CONTACT_EDGE_ABUT2,
                                    AbutStyle.CONTACT_EDGE_ABUT2),
    "Abut3PinSmaller": AbutCaseStyle(0.0, AbutStyle.DIFF_EDGE_ABUT, AbutStyle.DIFF_EDGE_ABUT),
}


@dataclass(frozen=True, slots=True)
class AbutmentSpec:
    shape_ref: int
    pin_size: int                 # dbu
    directions: tuple[str, ...]
    abut_class: str
    pin: str
    case_styles: dict = field(default_factory=lambda: dict(MOS_CASE_STYLES), hash=False)
    no_abut_spacing: float = 0.4  # um

    def __post_init__(self):
        if self.no_abut_spacing < 0:
            raise ValueError("no_abut_spacing must be >= 0")


@dataclass(frozen=True, slots=True)
class AbutCase:
    name: str                     # "NoAbut" or an ABUT_CASE_NAMES value
    pin_degree: int = 0
    relation: str = ""            # Equal/Bigger/Smaller from a's perspective
    styles: tuple[AbutStyle, AbutStyle] | None = None
    spacing: float = 0.0

    @property
    def is_abut(self) -> bool:
        return self.name != "NoAbut"


NO_ABUT = AbutCase("NoAbut")


@dataclass
class PlacedInstance:
    cell: CellLayout
    transform: Transform
    instance_id: str
    pin_nets: dict[str, str] = field(default_factory=dict)
    original_cell: CellLayout | None = None
    abutted_with: str | None = None

    def placed_shapes(self):
        return [apply_transform(s, self.transform) for s in self.cell.shapes]

    def placed_bbox(self) -> Rect:
        out = None
        for s in self.placed_shapes():
            b = bbox(s)
            out = b if out is None else out.union(b)
        return out


# --- stretching --------------------------------------------------------------

def stretch_params(cell: CellLayout, handle_name: str, drag: tuple[int, int],
                   tech: TechnologyData) -> DeviceParams:
    """Parameter update for a drag: project, apply mode, snap, clamp, evaluate.

    The drag is a (dx, dy) vector in dbu; the component along the handle
    direction is used, the orthogonal component ignored.
    """
    from .pcell.params import evaluate_params

    handle = _find_handle(cell, handle_name)
    proj = drag[0] if handle.direction == "EAST_WEST" else drag[1]
    sign = _OUTWARD_SIGN[handle.location]
    old = getattr(cell.params, handle.parameter)
    if handle.stretch_type == "relative":
        new_um = old / DBU_PER_UM + sign * proj / DBU_PER_UM
    else:
        # absolute: the released pointer's axis coordinate becomes the value
        anchor = handle_anchor(cell, handle)
        coord = anchor.x if handle.direction == "EAST_WEST" else anchor.y
        new_um = sign * (coord + proj) / DBU_PER_UM
    snap_dbu = max(1, um(handle.snap_res))
    new_um = snap(um(new_um), snap_dbu) / DBU_PER_UM
    new_um = min(max(new_um, handle.min_val), handle.max_val)
    raw = replace(cell.params, **{handle.parameter: um(new_um)})
    if cell.params.device == "capmim" and handle.parameter == "w":
        return stretch_capacitor(cell, um(new_um), tech)
    return evaluate_params(raw, tech, changed=handle.parameter)


def apply_stretch(cell: CellLayout, handle_name: str, drag: tuple[int, int],
                  tech: TechnologyData) -> tuple[DeviceParams, CellLayout]:
    """Release a handle drag: new parameters plus a freshly generated layout."""
    from .pcell import generate

    params = stretch_params(cell, handle_name, drag, tech)
    return params, generate(params, tech)


def _find_handle(cell: CellLayout, name: str) -> StretchHandle:
    for h in cell.handles:
        if h.name == name:
            return h
    raise UnknownHandle(f"no handle {name!r} on cell {cell.name!r}")


def stretch_capacitor(cell: CellLayout, new_w: int, tech: TechnologyData) -> DeviceParams:
    """Width change keeping the plate area constant within one grid quantum."""
    from .pcell.params import evaluate_params

    p = cell.params
    new_l = snap(round(p.w * p.l / new_w), tech.grid)
    raw = replace(p, w=new_w, l=new_l, wtot=None)
    return evaluate_params(raw, tech, changed="w")


def stretch_transistor_fingers(cell: CellLayout, new_fingers: int,
                               tech: TechnologyData) -> DeviceParams:
    """Refinger at constant total width; edge clearances stay rule-driven."""
    from .pcell.params import evaluate_params

    p = cell.params
    raw = replace(p, fingers=new_fingers, w=None, wtot=p.wtot)
    return evaluate_params(raw, tech, changed="wtot")


# --- abutment ----------------------------------------------------------------

def _facing(a: PlacedInstance, b: PlacedInstance):
    """Return (left, right, left_spec, right_spec) for a horizontal face-off.

    The instance whose abutment shape sits further west is the left member;
    its EAST face must face the other's WEST face.
    """
    for sa in a.cell.abut_specs:
        for sb in b.cell.abut_specs:
            if sa.abut_class != sb.abut_class:
                continue
            ca = bbox(apply_transform(a.cell.shapes[sa.shape_ref], a.transform)).center.x
            cb = bbox(apply_transform(b.cell.shapes[sb.shape_ref], b.transform)).center.x
            if ca <= cb:
                left, right, ls, rs = a, b, sa, sb
            else:
                left, right, ls, rs = b, a, sb, sa
            if "EAST" in ls.directions and "WEST" in rs.directions:
                return left, right, ls, rs
    return None


def _face_x(inst: PlacedInstance, spec: AbutmentSpec, side: str) -> int | None:
    if side not in spec.directions:
        return None
    ref = apply_transform(inst.cell.shapes[spec.shape_ref], inst.transform)
    b = bbox(ref)
    return b.hi.x if side == "EAST" else b.lo.x


def detect_abutment(a: PlacedInstance, b: PlacedInstance,
                    net_degree=None) -> AbutCase:
    """Classify a pair of placed instances.

    net_degree: optional callable net -> number of device pins on that net in
    the enclosing design (used to pick the 2-pin vs 3-pin case).  Without it,
    or without net labels, the pair is treated as privately connected (2-pin).
    """
    pair = _facing(a, b)
    if pair is None:
        return NO_ABUT
    left, right, ls, rs = pair
    gap = _face_x(right, rs, "WEST") - _face_x(left, ls, "EAST")
    if gap > um(ls.no_abut_spacing):
        return NO_ABUT

    net_l = left.pin_nets.get(ls.pin)
    net_r = right.pin_nets.get(rs.pin)
    if net_l is not None and net_r is not None and net_l != net_r:
        return NO_ABUT

    degree = 2
    if net_l is not None and net_degree is not None:
        degree = 3 if net_degree(net_l) > 2 else 2

    # size relation from a's perspective
    sa, sb = (ls, rs) if left is a else (rs, ls)
    if sa.pin_size == sb.pin_size:
        relation = "Equal"
    elif sa.pin_size > sb.pin_size:
        relation = "Bigger"
    else:
        relation = "Smaller"
    name = ABUT_CASE_NAMES[(degree, relation)]
    style = ls.case_styles[name]
    return AbutCase(name=name, pin_degree=degree, relation=relation,
                    styles=(style.left, style.right), spacing=style.spacing)


def apply_abutment(a: PlacedInstance, b: PlacedInstance, case: AbutCase,
                   tech: TechnologyData) -> tuple[PlacedInstance, PlacedInstance]:
    """Regenerate both instances with joint-side edge variants and snap flush."""
    from .pcell import registry

    if not case.is_abut:
        raise IncompatibleCase("cannot apply NoAbut")
    pair = _facing(a, b)
    if pair is None:
        raise IncompatibleCase("instances have no facing abutment specs")
    left, right, ls, rs = pair
    for inst in (left, right):
        p = inst.cell.params
        if p is None or p.device not in registry:
            raise IncompatibleCase(f"{inst.instance_id} is not a generated device")
        if p.guard_ring != "none" or p.multiplier != 1:
            raise IncompatibleCase(
                "abutment requires an unguarded, multiplier-1 instance")
        if inst.transform.rotation or inst.transform.mirror_x:
            raise IncompatibleCase("abutment of rotated instances not supported")

    lstyle, rstyle = case.styles
    left.original_cell = left.cell
    right.original_cell = right.cell
    left.cell = registry[left.cell.params.device].generate(
        left.cell.params, tech, edge_styles={"EAST": lstyle})
    right.cell = registry[right.cell.params.device].generate(
        right.cell.params, tech, edge_styles={"WEST": rstyle})
    # snap the right instance so the joint gap equals the case spacing
    lface = _face_x(left, left.cell.abut_specs[0], "EAST")
    rface = _face_x(right, right.cell.abut_specs[0], "WEST")
    dx = lface + um(case.spacing) - rface
    right.transform = replace(
        right.transform,
        translation=Point(right.transform.translation.x + dx,
                          right.transform.translation.y))
    left.abutted_with = right.instance_id
    right.abutted_with = left.instance_id
    return a, b


def undo_abutment(a: PlacedInstance, b: PlacedInstance) -> tuple[PlacedInstance, PlacedInstance]:
    """Restore both instances to their pre-abutment layouts, bit-equal."""
    if (a.abutted_with != b.instance_id or b.abutted_with != a.instance_id
            or a.original_cell is None or b.original_cell is None):
        raise NotAbutted(f"{a.instance_id} and {b.instance_id} are not abutted")
    a.cell, a.original_cell, a.abutted_with = a.original_cell, None, None
    b.cell, b.original_cell, b.abutted_with = b.original_cell, None, None
    return a, b
