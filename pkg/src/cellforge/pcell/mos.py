"""High-voltage annular MOS generator (pmos20t).

Construction runs serially in a fixed order: octagonal poly gate with a
drain pocket in the hole, diffusion with drain/source contacts, the drain
well stack, the n-well body, the source/drain implant, the bulk contact
ring and finally the oxide-class marker.  A device multiplier places that
core side by side m times; a guard ring, when selected, surrounds all of
them.

Abutment edge variants regenerate the device with one side opened up:
the joint side loses its bulk-ring segment, the diffusion is cut per the
style, and the outermost source contact column is kept or dropped.
"""

from __future__ import annotations

from ..errors import GeometryInfeasible
from ..geometry import Point, Rect, Shape, bbox, octagon_with_hole
from ..interact import AbutmentSpec, AbutStyle, StretchHandle
from ..techdb import constant, rule
from .base import DeviceGenerator, contact_array, contact_ring, guard_ring, register, well_stack
from .cell import STRONG_METAL, WEAK_POLY


def _side_cut(style, side, src_ext, scg, edc, epd, grid):
    """Joint-side plan: how far past the outer gate edge each layer runs."""
    if style is None:
        return {"trim": False, "ext": src_ext, "col": True, "pimp_ext": src_ext + epd}
    keep_col = style in (AbutStyle.DIFF_EDGE_ABUT, AbutStyle.DIFF_ABUT)
    if style == AbutStyle.CONTACT_EDGE_ABUT2:
        # the east-facing (left) member keeps the shared column
        keep_col = side == "EAST"
    if style == AbutStyle.DIFF_HALF:
        ext = (src_ext // 2) // grid * grid
    elif keep_col:
        ext = src_ext
    else:
        ext = scg - edc
    pimp_ext = ext if style == AbutStyle.DIFF_ABUT else ext + epd
    return {"trim": True, "ext": ext, "col": keep_col, "pimp_ext": pimp_ext}


@register
class Pmos20T(DeviceGenerator):
    device = "pmos20t"
    pin_names = ("G", "S", "D", "B")
    connection_kind = {"G": WEAK_POLY, "S": STRONG_METAL, "D": STRONG_METAL, "B": STRONG_METAL}
    default_params = {"l": 1000, "w": 5000, "fingers": 2}
    steps = ("gate", "source_drain", "drain_wells", "body_well", "sd_implant",
             "bulk_ring", "oxide_marker", "guard")

    def plan(self, params, tech, edge_styles):
        if edge_styles and (params.multiplier != 1 or params.guard_ring != "none"):
            raise GeometryInfeasible("edge variants need multiplier 1 and no guard ring")
        c = rule(tech, "min_width", "cont")
        sc = rule(tech, "min_spacing", ("cont", "cont"))
        edc = rule(tech, "min_enclosure", ("diff", "cont"))
        emc = rule(tech, "min_enclosure", ("met1", "cont"))
        e_nw = rule(tech, "min_enclosure", ("nwell", "diff"))
        epd = rule(tech, "min_enclosure", ("pimp", "diff"))
        scg = constant(tech, "cont_gate_sp")
        ring_gap = constant(tech, "ring_gap")
        rw = c + 2 * edc

        f, l, w = params.fingers, params.l, params.w
        hole_w = max(w, c + 2 * edc)
        hole_h = c + 2 * edc
        gate_w = hole_w + 2 * l
        gate_h = hole_h + 2 * l
        src_col_w = c + 2 * scg
        pitch = gate_w + src_col_w
        src_ext = scg + c + edc

        gates = [Rect(Point(i * pitch, 0), Point(i * pitch + gate_w, gate_h))
                 for i in range(f)]
        holes = [g.expanded(-l) for g in gates]

        west = _side_cut(edge_styles.get("WEST"), "WEST", src_ext, scg, edc, epd, tech.grid)
        east = _side_cut(edge_styles.get("EAST"), "EAST", src_ext, scg, edc, epd, tech.grid)
        diff = Rect(Point(gates[0].lo.x - west["ext"], -src_ext),
                    Point(gates[-1].hi.x + east["ext"], gate_h + src_ext))
        # ring geometry always derives from the untrimmed core
        full_diff = Rect(Point(gates[0].lo.x - src_ext, -src_ext),
                         Point(gates[-1].hi.x + src_ext, gate_h + src_ext))
        ring_inner = full_diff.expanded(ring_gap)
        ring_outer = ring_inner.expanded(rw)
        core_extent = ring_outer.expanded(e_nw)
        core_gap = max(rule(tech, "min_spacing", ("nwell", "nwell")),
                       rule(tech, "min_spacing", ("thickox", "thickox")))
        core_pitch = core_extent.width + core_gap

        return {
            "c": c, "sc": sc, "edc": edc, "emc": emc, "e_nw": e_nw, "epd": epd,
            "scg": scg, "rw": rw, "gates": gates, "holes": holes, "diff": diff,
            "full_diff": full_diff, "ring_inner": ring_inner, "ring_outer": ring_outer,
            "core_extent": core_extent, "offsets": [i * core_pitch
                                                    for i in range(params.multiplier)],
            "west": west, "east": east, "gate_h": gate_h, "src_ext": src_ext,
            "corner": constant(tech, "p1_corn"),
        }

    def gate(self, b, ctx, params, tech):
        pw = rule(tech, "min_width", "poly1")
        gates = ctx["gates"]
        for dx in ctx["offsets"]:
            for g, h in zip(gates, ctx["holes"]):
                b.add(octagon_with_hole("poly1", g.translated(dx, 0),
                                        h.translated(dx, 0), ctx["corner"]), pin="G")
            if len(gates) > 1:
                # poly bar ties the finger gates into one node
                bar = Rect(Point(gates[0].lo.x, ctx["gate_h"]),
                           Point(gates[-1].hi.x, ctx["gate_h"] + pw))
                b.add(self._shape("poly1", bar, dx), pin="G")

    def source_drain(self, b, ctx, params, tech):
        c, edc, emc, scg = ctx["c"], ctx["edc"], ctx["emc"], ctx["scg"]
        sm = rule(tech, "min_spacing", ("met1", "met1"))
        gate_h = ctx["gate_h"]
        diff = ctx["diff"]
        gates, holes = ctx["gates"], ctx["holes"]
        strap_half = (c + 2 * emc) // 2
        # source comb hangs from a bottom rail, drain straps rise to a top rail;
        # on a single metal the two combs interleave without crossing
        rail_lo = Rect(Point(diff.lo.x + edc, -scg - c), Point(diff.hi.x - edc, -scg))
        col_met_top = gate_h + c // 2 + emc
        drain_rail = Rect(Point(holes[0].center.x - strap_half, col_met_top + sm),
                          Point(holes[-1].center.x + strap_half,
                                col_met_top + sm + c + 2 * emc))
        for dx in ctx["offsets"]:
            # the diffusion is a ring: a source frame around the gates plus an
            # isolated drain pocket inside each hole -- nothing under the poly,
            # so source and drain extract as distinct nets
            south = Rect(Point(diff.lo.x, diff.lo.y), Point(diff.hi.x, 0))
            north = Rect(Point(diff.lo.x, gate_h), Point(diff.hi.x, diff.hi.y))
            diff_shape = b.add(self._shape("diff", south, dx))
            if dx == 0:
                ctx["diff_shape"] = diff_shape
            b.add(self._shape("diff", north, dx))
            b.add(self._shape("diff", Rect(Point(diff.lo.x, 0),
                                           Point(gates[0].lo.x, gate_h)), dx))
            b.add(self._shape("diff", Rect(Point(gates[-1].hi.x, 0),
                                           Point(diff.hi.x, gate_h)), dx))
            for left, right in zip(gates, gates[1:]):
                b.add(self._shape("diff", Rect(Point(left.hi.x, 0),
                                               Point(right.lo.x, gate_h)), dx))
            # drain pocket plus riser strap per finger
            for hole in ctx["holes"]:
                b.add(self._shape("diff", hole, dx))
                conts = contact_array(hole.translated(dx, 0), tech, enclosure=edc)
                b.add_all(conts, pin="D")
                pocket = bbox(conts[0].geometry)
                for s in conts[1:]:
                    pocket = pocket.union(bbox(s.geometry))
                b.add(self._shape("met1", pocket.expanded(emc)), pin="D")
                cx = hole.center.x
                strap = Rect(Point(cx - strap_half, pocket.lo.y - emc),
                             Point(cx + strap_half, drain_rail.hi.y))
                b.add(self._shape("met1", strap, dx), pin="D")
            b.add(self._shape("met1", drain_rail, dx), pin="D")
            # source rail below the gate array
            b.add_all(contact_array(rail_lo.translated(dx, 0), tech, enclosure=0), pin="S")
            rail_met = rail_lo.expanded(emc)
            b.add(self._shape("met1", rail_met, dx), pin="S")
            # source columns between and outside the fingers
            for i in range(len(gates) + 1):
                if i == 0:
                    if not ctx["west"]["col"]:
                        continue
                    x0 = gates[0].lo.x - scg - c
                else:
                    if i == len(gates) and not ctx["east"]["col"]:
                        continue
                    x0 = gates[i - 1].hi.x + scg
                # inset so no contact can touch the gate tie bar or the diff edge row
                region = Rect(Point(x0, edc), Point(x0 + c, gate_h - edc))
                b.add_all(contact_array(region.translated(dx, 0), tech, enclosure=0), pin="S")
                col_met = Rect(Point(x0 - emc, rail_met.lo.y), Point(x0 + c + emc, col_met_top))
                b.add(self._shape("met1", col_met, dx), pin="S")

    def drain_wells(self, b, ctx, params, tech):
        for dx in ctx["offsets"]:
            for hole in ctx["holes"]:
                for s in well_stack(hole.translated(dx, 0), tech):
                    b.add(s)

    def body_well(self, b, ctx, params, tech):
        grown = ctx["diff"].expanded(ctx["e_nw"])
        body = Rect(Point(ctx["diff"].lo.x if ctx["west"]["trim"] else grown.lo.x, grown.lo.y),
                    Point(ctx["diff"].hi.x if ctx["east"]["trim"] else grown.hi.x, grown.hi.y))
        for dx in ctx["offsets"]:
            b.add(self._shape("nwell", body, dx))

    def sd_implant(self, b, ctx, params, tech):
        diff, epd = ctx["diff"], ctx["epd"]
        gates = ctx["gates"]
        imp = Rect(Point(gates[0].lo.x - ctx["west"]["pimp_ext"], diff.lo.y - epd),
                   Point(gates[-1].hi.x + ctx["east"]["pimp_ext"], diff.hi.y + epd))
        for dx in ctx["offsets"]:
            b.add(self._shape("pimp", imp, dx))

    def bulk_ring(self, b, ctx, params, tech):
        west, east = ctx["west"], ctx["east"]
        sides = ["south", "north"]
        if not west["trim"]:
            sides.append("west")
        if not east["trim"]:
            sides.append("east")
        clip = (ctx["diff"].lo.x if west["trim"] else ctx["core_extent"].lo.x,
                ctx["diff"].hi.x if east["trim"] else ctx["core_extent"].hi.x)
        for dx in ctx["offsets"]:
            # bars on the horizontal sides only: a closed metal ring would wall
            # off every lateral strap on the single routing metal
            parts = contact_ring(ctx["ring_inner"].translated(dx, 0), ctx["rw"], tech,
                                 implant="nimp", nwell=True, sides=tuple(sides),
                                 contact_sides=("south", "north"),
                                 x_clip=(clip[0] + dx, clip[1] + dx))
            b.add_all(parts["diff"])
            b.add_all(parts["cont"], pin="B")
            b.add_all(parts["met"], pin="B")
            b.add_all(parts["implant"])
            b.add_all(parts["nwell"])

    def oxide_marker(self, b, ctx, params, tech):
        ext = ctx["core_extent"]
        marker = Rect(Point(ctx["diff"].lo.x if ctx["west"]["trim"] else ext.lo.x, ext.lo.y),
                      Point(ctx["diff"].hi.x if ctx["east"]["trim"] else ext.hi.x, ext.hi.y))
        for dx in ctx["offsets"]:
            b.add(self._shape("thickox", marker, dx))

    def guard(self, b, ctx, params, tech):
        if params.guard_ring == "none":
            return
        union = ctx["core_extent"].translated(ctx["offsets"][-1], 0).union(ctx["core_extent"])
        b.add_all(guard_ring(union, params.guard_ring, tech))

    def attach_metadata(self, cell, ctx, tech):
        lo, hi = tech.device_limits[self.device]["l"]
        cell.handles = [
            StretchHandle("width_handle_left", 0, "wtot", "CENTER_LEFT", "EAST_WEST",
                          "relative", 0.4, 10000.0, tech.grid / 1000),
            StretchHandle("width_handle_right", 0, "wtot", "CENTER_RIGHT", "EAST_WEST",
                          "relative", 0.4, 10000.0, tech.grid / 1000),
            StretchHandle("length_handle", 0, "l", "TOP_CENTER", "NORTH_SOUTH",
                          "relative", lo / 1000, hi / 1000, tech.grid / 1000),
        ]
        if cell.params.multiplier == 1 and cell.params.guard_ring == "none":
            cell.abut_specs = [AbutmentSpec(
                shape_ref=cell.shape_index(ctx["diff_shape"]),
                pin_size=cell.params.w,
                directions=("EAST", "WEST"),
                abut_class="mos_source",
                pin="S",
            )]

    @staticmethod
    def _shape(layer, rect, dx=0):
        return Shape(layer, rect.translated(dx, 0) if dx else rect)
