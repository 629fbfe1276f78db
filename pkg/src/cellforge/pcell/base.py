"""Shared generator machinery: contact arrays, rings, well stacks, base class.

Generators are pure functions of (params, tech): two calls with equal inputs
produce bit-equal shape lists.  Construction steps run in a fixed order per
device so derived devices can extend the shared step list.
"""

from __future__ import annotations

from ..errors import GeometryInfeasible, UnknownDevice
from ..geometry import Point, Rect, Shape
from ..techdb import TechnologyData, constant, rule
from .cell import CellLayout
from .params import DeviceParams, evaluate_params


def contact_array(region: Rect, tech: TechnologyData,
                  enclosure: int | None = None, net: str | None = None) -> list[Shape]:
    """Centered array of square contacts filling `region`.

    rows = floor((h - 2*enc + s) / (c + s)) and likewise for columns, with the
    contact size c and spacing s from the rules and `enclosure` defaulting to
    the diff-over-contact rule.  Raises GeometryInfeasible below a 1x1 fit.
    """
    c = rule(tech, "min_width", "cont")
    s = rule(tech, "min_spacing", ("cont", "cont"))
    enc = rule(tech, "min_enclosure", ("diff", "cont")) if enclosure is None else enclosure
    cols = (region.width - 2 * enc + s) // (c + s)
    rows = (region.height - 2 * enc + s) // (c + s)
    if cols < 1 or rows < 1:
        raise GeometryInfeasible(
            f"no contact fits a {region.width}x{region.height} region (enc {enc})")
    grid = tech.grid
    off_x = ((region.width - (cols * c + (cols - 1) * s)) // 2) // grid * grid
    off_y = ((region.height - (rows * c + (rows - 1) * s)) // 2) // grid * grid
    x0 = region.lo.x + off_x
    y0 = region.lo.y + off_y
    out = []
    for j in range(rows):
        y = y0 + j * (c + s)
        for i in range(cols):
            x = x0 + i * (c + s)
            out.append(Shape("cont", Rect(Point(x, y), Point(x + c, y + c)), net))
    return out


def _ring_rects(inner: Rect, width: int) -> dict[str, Rect]:
    """Four rects forming a ring of `width` around `inner` (corners overlap)."""
    out = inner.expanded(width)
    return {
        "south": Rect(out.lo, Point(out.hi.x, inner.lo.y)),
        "north": Rect(Point(out.lo.x, inner.hi.y), out.hi),
        "west": Rect(out.lo, Point(inner.lo.x, out.hi.y)),
        "east": Rect(Point(inner.hi.x, out.lo.y), out.hi),
    }


def contact_ring(inner: Rect, width: int, tech: TechnologyData, implant: str,
                 net: str | None = None, nwell: bool = False,
                 sides: tuple[str, ...] = ("south", "north", "west", "east"),
                 contact_sides: tuple[str, ...] | None = None,
                 x_clip: tuple[int, int] | None = None) -> dict[str, list[Shape]]:
    """Diffusion ring with slot contact bars, metal and implant.

    One contact bar per side keeps the shape count independent of the ring
    size.  `x_clip` trims every horizontal piece to the given extents (used by
    abutment edge variants); `sides` selects which ring segments exist and
    `contact_sides` which of them carry a bar and metal (a closed metal ring
    would wall off lateral routing on a single-metal stack).
    Returns shapes grouped by layer role: diff, cont, met, implant, nwell.
    """
    c = rule(tech, "min_width", "cont")
    sc = rule(tech, "min_spacing", ("cont", "cont"))
    edc = rule(tech, "min_enclosure", ("diff", "cont"))
    emc = rule(tech, "min_enclosure", ("met1", "cont"))
    e_imp = rule(tech, "min_enclosure", (implant, "diff"))
    rects = _ring_rects(inner, width)

    def clip(r: Rect) -> Rect:
        if x_clip is None:
            return r
        return Rect(Point(max(r.lo.x, x_clip[0]), r.lo.y),
                    Point(min(r.hi.x, x_clip[1]), r.hi.y))

    if contact_sides is None:
        contact_sides = sides
    # slot bar centered in the ring width (never less than the diff enclosure)
    off = max(edc, ((width - c) // 2) // tech.grid * tech.grid)
    out: dict[str, list[Shape]] = {"diff": [], "cont": [], "met": [], "implant": [], "nwell": []}
    vertical_met_y: list[int] = []
    for side in ("south", "north"):
        if side not in sides:
            continue
        r = clip(rects[side])
        out["diff"].append(Shape("diff", r, net))
        out["implant"].append(Shape(implant, clip(rects[side].expanded(e_imp)), net))
        if nwell:
            e_nw = rule(tech, "min_enclosure", ("nwell", "diff"))
            out["nwell"].append(Shape("nwell", clip(rects[side].expanded(e_nw))))
        if side not in contact_sides:
            continue
        y0 = r.lo.y + off
        bar = Rect(Point(r.lo.x + edc, y0), Point(r.hi.x - edc, y0 + c))
        out["cont"].append(Shape("cont", bar, net))
        met = bar.expanded(emc)
        out["met"].append(Shape("met1", met, net))
        vertical_met_y += [met.lo.y, met.hi.y]
    for side in ("west", "east"):
        if side not in sides:
            continue
        r = rects[side]
        out["diff"].append(Shape("diff", r, net))
        out["implant"].append(Shape(implant, r.expanded(e_imp), net))
        if nwell:
            e_nw = rule(tech, "min_enclosure", ("nwell", "diff"))
            out["nwell"].append(Shape("nwell", r.expanded(e_nw)))
        if side not in contact_sides:
            continue
        # stop short of the horizontal bars by the contact spacing rule
        end = -width + off + c + sc
        x0 = r.lo.x + off
        bar = Rect(Point(x0, inner.lo.y + end), Point(x0 + c, inner.hi.y - end))
        out["cont"].append(Shape("cont", bar, net))
        met = bar.expanded(emc)
        if vertical_met_y:
            met = Rect(Point(met.lo.x, min(vertical_met_y)), Point(met.hi.x, max(vertical_met_y)))
        out["met"].append(Shape("met1", met, net))
    return out


def guard_ring(core_bbox: Rect, style: str, tech: TechnologyData) -> list[Shape]:
    """Protective ring around a device core; style selects gap/width constants."""
    if style == "none":
        return []
    suffix = style.lower()
    gap = constant(tech, f"gr_gap_{suffix}")
    width = constant(tech, f"gr_width_{suffix}")
    parts = contact_ring(core_bbox.expanded(gap), width, tech, implant="pimp")
    return parts["diff"] + parts["cont"] + parts["met"] + parts["implant"]


def well_stack(drain_region: Rect, tech: TechnologyData) -> list[Shape]:
    """Deep + shallow wells under a drain pocket; the deep one contains the shallow."""
    shallow = drain_region.expanded(constant(tech, "pwsh_enc"))
    deep = shallow.expanded(constant(tech, "pwdp_enc"))
    return [Shape("pwell_deep", deep), Shape("pwell_shallow", shallow)]


class _Builder:
    """Accumulates shapes and pin membership during generation."""

    def __init__(self):
        self.shapes: list[Shape] = []
        self.pins: dict[str, list[Shape]] = {}

    def add(self, shape: Shape, pin: str | None = None) -> Shape:
        self.shapes.append(shape)
        if pin is not None:
            self.pins.setdefault(pin, []).append(shape)
        return shape

    def add_all(self, shapes, pin: str | None = None):
        for s in shapes:
            self.add(s, pin)


class DeviceGenerator:
    """Base device generator: fixed construction-step order, pure output."""

    device = ""
    pin_names: tuple[str, ...] = ()
    connection_kind: dict[str, str] = {}
    default_params: dict = {}
    steps: tuple[str, ...] = ()

    def defaults(self, tech: TechnologyData) -> DeviceParams:
        return evaluate_params(DeviceParams(device=self.device, **self.default_params), tech)

    def generate(self, params: DeviceParams, tech: TechnologyData,
                 edge_styles: dict | None = None) -> CellLayout:
        if params.wtot is None or params.w is None:
            params = evaluate_params(params, tech)
        builder = _Builder()
        ctx = self.plan(params, tech, edge_styles or {})
        for step in self.steps:
            getattr(self, step)(builder, ctx, params, tech)
        cell = CellLayout(
            name=self.device, params=params, shapes=builder.shapes,
            pins={p: builder.pins.get(p, []) for p in self.pin_names if builder.pins.get(p)},
            connection_kind=dict(self.connection_kind),
        )
        self.attach_metadata(cell, ctx, tech)
        return cell

    def plan(self, params, tech, edge_styles) -> dict:
        return {}

    def attach_metadata(self, cell: CellLayout, ctx: dict, tech: TechnologyData) -> None:
        """Handles and abutment specs; default none."""


registry: dict[str, DeviceGenerator] = {}


def register(cls):
    registry[cls.device] = cls()
    return cls


def generate(params: DeviceParams, tech: TechnologyData) -> CellLayout:
    """Generate a device layout; dispatches on params.device."""
    try:
        gen = registry[params.device]
    except KeyError:
        raise UnknownDevice(f"no generator for device {params.device!r}") from None
    return gen.generate(params, tech)
