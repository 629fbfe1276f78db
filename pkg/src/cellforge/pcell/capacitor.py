"""Poly/metal plate capacitor (capmim).

The top metal plate is exactly w x l, so the capacitance-bearing area is the
product of the two parameters; stretching trades w against l at constant
area.  The bottom poly plate extends west into a contacted head.
"""

from __future__ import annotations

from ..errors import GeometryInfeasible
from ..geometry import Point, Rect, Shape, bbox
from ..interact import StretchHandle
from ..techdb import rule
from .base import DeviceGenerator, contact_array, register
from .cell import STRONG_METAL


@register
class PlateCapacitor(DeviceGenerator):
    device = "capmim"
    pin_names = ("PLUS", "MINUS")
    connection_kind = {"PLUS": STRONG_METAL, "MINUS": STRONG_METAL}
    default_params = {"l": 10000, "w": 10000}
    steps = ("bottom_plate", "bottom_contact", "top_plate", "oxide_marker")

    def plan(self, params, tech, edge_styles):
        if edge_styles:
            raise GeometryInfeasible("capacitors do not abut")
        c = rule(tech, "min_width", "cont")
        epc = rule(tech, "min_enclosure", ("poly1", "cont"))
        emc = rule(tech, "min_enclosure", ("met1", "cont"))
        sm = rule(tech, "min_spacing", ("met1", "met1"))

        plate = Rect(Point(0, 0), Point(params.w, params.l))
        # bottom-plate head west of the top plate, far enough that the head
        # pad clears the plate by the metal spacing rule
        pad_x1 = -sm
        cont_x1 = pad_x1 - emc
        cont_x0 = cont_x1 - c
        poly_x0 = cont_x0 - epc
        bottom = Rect(Point(poly_x0, -epc), Point(params.w + epc, params.l + epc))
        cont_region = Rect(Point(cont_x0, epc), Point(cont_x1, params.l - epc))
        return {"plate": plate, "bottom": bottom, "cont_region": cont_region}

    def bottom_plate(self, b, ctx, params, tech):
        b.add(Shape("poly1", ctx["bottom"]))

    def bottom_contact(self, b, ctx, params, tech):
        emc = rule(tech, "min_enclosure", ("met1", "cont"))
        conts = contact_array(ctx["cont_region"], tech, enclosure=0)
        b.add_all(conts, pin="MINUS")
        pad = bbox(conts[0].geometry)
        for s in conts[1:]:
            pad = pad.union(bbox(s.geometry))
        b.add(Shape("met1", pad.expanded(emc)), pin="MINUS")

    def top_plate(self, b, ctx, params, tech):
        ctx["plate_shape"] = b.add(Shape("met1", ctx["plate"]), pin="PLUS")

    def oxide_marker(self, b, ctx, params, tech):
        etp = rule(tech, "min_enclosure", ("thickox", "poly1"))
        b.add(Shape("thickox", ctx["bottom"].expanded(etp)))

    def attach_metadata(self, cell, ctx, tech):
        limits = tech.device_limits[self.device]
        w_lo, w_hi = limits["w"]
        cell.handles = [
            StretchHandle("width_handle_right", cell.shape_index(ctx["plate_shape"]),
                          "w", "CENTER_RIGHT", "EAST_WEST", "relative",
                          w_lo / 1000, w_hi / 1000, tech.grid / 1000),
        ]
