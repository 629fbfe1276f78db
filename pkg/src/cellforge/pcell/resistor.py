"""Poly snake resistor (respoly).

The resistive body is a single Manhattan path whose centerline length equals
the l parameter exactly for any bend count: bends fold the body into a snake
without changing length or width, so the resistance stays put.  Dogbone heads
at both ends carry the contacts and stick out past the body marking.
"""

from __future__ import annotations

from ..errors import GeometryInfeasible
from ..geometry import Path, Point, Rect, Shape, bbox
from ..techdb import constant, rule
from .base import DeviceGenerator, contact_array, register
from .cell import STRONG_METAL


@register
class SnakeResistor(DeviceGenerator):
    device = "respoly"
    pin_names = ("PLUS", "MINUS")
    connection_kind = {"PLUS": STRONG_METAL, "MINUS": STRONG_METAL}
    default_params = {"l": 20000, "w": 1000}
    steps = ("body", "marking", "heads")

    def plan(self, params, tech, edge_styles):
        if edge_styles:
            raise GeometryInfeasible("resistors do not abut")
        w, l, b = params.w, params.l, params.bends
        ps = rule(tech, "min_spacing", ("poly1", "poly1"))
        pitch = w + ps
        stripes = b + 1
        vertical = l - b * pitch
        if vertical < stripes * max(w, tech.grid):
            raise GeometryInfeasible(
                f"{b} bends leave {vertical} dbu of body for {stripes} stripes")
        base = (vertical // stripes) // tech.grid * tech.grid
        extra = (vertical - base * stripes) // tech.grid
        # grant the leftover grid quanta to the leading stripes; nonincreasing
        # heights keep every bend above the first stripe's baseline
        heights = [base + (tech.grid if i < extra else 0) for i in range(stripes)]

        points = [Point(0, 0)]
        y = 0
        for i, h in enumerate(heights):
            y = y + h if i % 2 == 0 else y - h
            points.append(Point(i * pitch, y))
            if i < b:
                points.append(Point((i + 1) * pitch, y))
        path = Path(tuple(points), w)
        assert path.length() == l

        c = rule(tech, "min_width", "cont")
        epc = rule(tech, "min_enclosure", ("poly1", "cont"))
        lap = constant(tech, "res_head_lap")
        sp = constant(tech, "res_cont_sp")
        head_w = max(w, c + 2 * epc)
        head_len = sp + c + epc
        body = bbox(path)
        lo_half = w // 2

        first, last = points[0], points[-1]
        last_south = b % 2 == 1  # odd bend count: the last stripe runs downward
        heads = []
        for anchor, south, flush_right in ((first, True, True),
                                           (last, last_south, False)):
            if flush_right:
                x1 = anchor.x + (w - lo_half)
                x0 = x1 - head_w
            else:
                x0 = anchor.x - lo_half
                x1 = x0 + head_w
            if south:
                rect = Rect(Point(x0, body.lo.y - head_len), Point(x1, anchor.y + lap))
                cont = Rect(Point(x0 + epc, rect.lo.y + epc), Point(x1 - epc, body.lo.y - sp))
            else:
                rect = Rect(Point(x0, anchor.y - lap), Point(x1, body.hi.y + head_len))
                cont = Rect(Point(x0 + epc, body.hi.y + sp), Point(x1 - epc, rect.hi.y - epc))
            heads.append((rect, cont))

        # widen the marking over the dogbones so heads cross it only lengthwise
        mark_x0 = min(body.lo.x, *(h[0].lo.x for h in heads))
        mark_x1 = max(body.hi.x, *(h[0].hi.x for h in heads))
        marking = Rect(Point(mark_x0, body.lo.y), Point(mark_x1, body.hi.y))
        return {"path": path, "heads": heads, "marking": marking}

    def body(self, b, ctx, params, tech):
        b.add(Shape("poly1", ctx["path"]))

    def marking(self, b, ctx, params, tech):
        b.add(Shape("pimp", ctx["marking"]))

    def heads(self, b, ctx, params, tech):
        emc = rule(tech, "min_enclosure", ("met1", "cont"))
        for pin, (head, cont_region) in zip(self.pin_names, ctx["heads"]):
            b.add(Shape("poly1", head))
            conts = contact_array(cont_region, tech, enclosure=0)
            b.add_all(conts, pin=pin)
            pad = bbox(conts[0].geometry)
            for s in conts[1:]:
                pad = pad.union(bbox(s.geometry))
            b.add(Shape("met1", pad.expanded(emc)), pin=pin)
