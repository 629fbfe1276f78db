"""Verification pipeline: DRC, netlist extraction, LVS, flylines, DBCOMP.

All operations are read-only over their inputs.  DRC semantics for this
rule set:

* min_width: per-shape; rectangles use the short side, paths their drawn
  width, rings (octagon-with-hole) the outer-to-hole edge distance.
* min_spacing, same layer: touching or overlapping shapes count as merged
  material; a violation is a pair with 0 < distance < rule.
* min_spacing, two layers: overlap counts too (distance < rule, including 0).
* min_enclosure(outer, inner): applies only to inner shapes that overlap the
  outer layer at all; some outer shape must enclose them by the rule value.
* min_extension(a, b): where a partially overlaps b, a's bbox must extend
  past b's bbox by the rule value on every side it crosses.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field

from .errors import ParseError
from .geometry import (OctagonWithHole, Path, Point, Polygon, Rect, Shape,
                       apply_transform, bbox, boundary_distance, min_spacing,
                       segment_distance, shape_contains_point, shapes_intersect)
from .techdb import TechnologyData

PARAM_REL_TOL = 1e-6


# --- DRC ----------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    rule: object                  # techdb.DesignRule
    shapes: tuple[str, ...]       # offending shape refs "instance/index"
    measured: float               # dbu
    location: Point

    def __str__(self):
        return (f"{self.rule.kind} {' '.join(self.rule.layers)}: measured "
                f"{self.measured:g} < {self.rule.value} at ({self.location.x},"
                f"{self.location.y}) [{' '.join(self.shapes)}]")


def _flatten(design) -> list[tuple[str, Shape]]:
    out = []
    for inst in design:
        pin_of = {id(s): pin for pin, members in inst.cell.pins.items() for s in members}
        for i, s in enumerate(inst.cell.shapes):
            placed = apply_transform(s, inst.transform)
            net = placed.net
            if net is None:
                pin = pin_of.get(id(s))
                if pin is not None:
                    net = inst.pin_nets.get(pin)
            out.append((f"{inst.instance_id}/{i}", placed.with_net(net)))
    return out


class _XSweep:
    """Candidate pairs whose bboxes come within `reach` of each other.

    Left-to-right sweep with an active list pruned by bbox right edge, so the
    cost stays near-linear even with design-spanning sheets in the mix.
    """

    def __init__(self, items):
        # items: list of (ref, shape); sorted by bbox lo.x
        self.entries = sorted(((bbox(s), ref, s) for ref, s in items),
                              key=lambda e: (e[0].lo.x, e[1]))

    def pairs(self, others: "_XSweep | None" = None, reach: int = 0):
        if others is None:
            active: list = []
            for entry in self.entries:
                ba, ref_a, sa = entry
                active = [e for e in active if e[0].hi.x >= ba.lo.x - reach]
                for bb, ref_b, sb in active:
                    if bb.lo.y > ba.hi.y + reach or ba.lo.y > bb.hi.y + reach:
                        continue
                    yield (ref_b, sb, ref_a, sa)
                active.append(entry)
            return
        b_entries = others.entries
        j = 0
        admitted = -math.inf
        active = []
        for ba, ref_a, sa in self.entries:
            threshold = max(admitted, ba.hi.x + reach)
            while j < len(b_entries) and b_entries[j][0].lo.x <= threshold:
                active.append(b_entries[j])
                j += 1
            admitted = threshold
            active = [e for e in active if e[0].hi.x >= ba.lo.x - reach]
            for bb, ref_b, sb in active:
                if (bb.lo.x > ba.hi.x + reach
                        or bb.lo.y > ba.hi.y + reach or ba.lo.y > bb.hi.y + reach):
                    continue
                yield (ref_a, sa, ref_b, sb)


def _shape_width(s: Shape) -> float:
    g = s.geometry
    if isinstance(g, Rect):
        return min(g.width, g.height)
    if isinstance(g, Path):
        return g.width
    if isinstance(g, OctagonWithHole):
        return boundary_distance(Polygon(g.outer.vertices), Polygon(g.hole.vertices))
    # generic polygon: distance between facing antiparallel edges
    verts = g.vertices
    n = len(verts)
    best = math.inf
    for i in range(n):
        a0, a1 = verts[i], verts[(i + 1) % n]
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            b0, b1 = verts[j], verts[(j + 1) % n]
            cross = (a1.x - a0.x) * (b1.y - b0.y) - (a1.y - a0.y) * (b1.x - b0.x)
            dot = (a1.x - a0.x) * (b1.x - b0.x) + (a1.y - a0.y) * (b1.y - b0.y)
            if cross != 0 or dot >= 0:
                continue
            mid = Point((a0.x + a1.x + b0.x + b1.x) // 4, (a0.y + a1.y + b0.y + b1.y) // 4)
            # strictly interior midpoint: keyhole bridge edges measure nothing
            if shape_contains_point(g, mid) != 1:
                continue
            best = min(best, segment_distance(a0, a1, b0, b1))
    if best is math.inf:
        b = bbox(g)
        return min(b.width, b.height)
    return best


def _enclosure_margin(outer: Shape, inner: Shape) -> float:
    """Smallest margin by which `outer` encloses `inner`; negative if it doesn't."""
    ib = bbox(inner)
    og = outer.geometry
    if isinstance(og, Rect):
        return min(ib.lo.x - og.lo.x, ib.lo.y - og.lo.y,
                   og.hi.x - ib.hi.x, og.hi.y - ib.hi.y)
    ob = bbox(outer)
    contained = (ob.contains_rect(ib)
                 and all(shape_contains_point(og, p) != 0 for p in ib.vertices()))
    if not contained:
        return -1.0
    return boundary_distance(og, inner.geometry)


def run_drc(design, tech: TechnologyData) -> list[Violation]:
    """Evaluate every rule over the flattened design; empty list means clean."""
    flat = _flatten(design)
    by_layer: dict[str, list] = {}
    for ref, s in flat:
        by_layer.setdefault(s.layer, []).append((ref, s))
    sweeps = {layer: _XSweep(items) for layer, items in by_layer.items()}

    violations = []
    for r in tech.rules.values():
        if r.kind == "min_width":
            for ref, s in by_layer.get(r.layers[0], ()):
                measured = _shape_width(s)
                if measured < r.value:
                    violations.append(Violation(r, (ref,), measured, bbox(s).center))
        elif r.kind == "min_spacing":
            la, lb = r.layers
            if la not in sweeps or lb not in sweeps:
                continue
            same = la == lb
            pair_iter = (sweeps[la].pairs(reach=r.value) if same
                         else sweeps[la].pairs(sweeps[lb], reach=r.value))
            for ref_a, sa, ref_b, sb in pair_iter:
                d = min_spacing(sa, sb)
                if d >= r.value or (same and d == 0):
                    continue
                mid = Point((bbox(sa).center.x + bbox(sb).center.x) // 2,
                            (bbox(sa).center.y + bbox(sb).center.y) // 2)
                violations.append(Violation(r, tuple(sorted((ref_a, ref_b))), d, mid))
        elif r.kind == "min_enclosure":
            outer_layer, inner_layer = r.layers
            if inner_layer not in sweeps or outer_layer not in sweeps:
                continue
            candidates: dict[str, list] = {}
            inner_shape: dict[str, Shape] = {}
            for ref_i, inner, ref_o, so in sweeps[inner_layer].pairs(sweeps[outer_layer]):
                if shapes_intersect(so, inner):
                    candidates.setdefault(ref_i, []).append(so)
                    inner_shape[ref_i] = inner
            for ref_i in sorted(candidates):
                inner = inner_shape[ref_i]
                measured = max(_enclosure_margin(so, inner) for so in candidates[ref_i])
                if measured < r.value:
                    violations.append(Violation(r, (ref_i,), measured, bbox(inner).center))
        elif r.kind == "min_extension":
            la, lb = r.layers
            if la not in sweeps or lb not in sweeps:
                continue
            for ref_a, sa, ref_b, sb in sweeps[la].pairs(sweeps[lb], reach=0):
                ab, bb_ = bbox(sa), bbox(sb)
                if ab.contains_rect(bb_) or bb_.contains_rect(ab):
                    continue
                if not shapes_intersect(sa, sb):
                    continue
                crossings = []
                if ab.hi.x > bb_.hi.x:
                    crossings.append(ab.hi.x - bb_.hi.x)
                if ab.lo.x < bb_.lo.x:
                    crossings.append(bb_.lo.x - ab.lo.x)
                if ab.hi.y > bb_.hi.y:
                    crossings.append(ab.hi.y - bb_.hi.y)
                if ab.lo.y < bb_.lo.y:
                    crossings.append(bb_.lo.y - ab.lo.y)
                if crossings and min(crossings) < r.value:
                    violations.append(Violation(
                        r, (ref_a, ref_b), min(crossings), bbox(sa).center))
    violations.sort(key=lambda v: (v.rule.kind, v.rule.layers, v.location.x,
                                   v.location.y, v.measured, v.shapes))
    return violations


def violations_to_text(violations) -> str:
    if not violations:
        return "DRC clean\n"
    return "\n".join(str(v) for v in violations) + "\n"


def violations_to_json(violations) -> str:
    return json.dumps([{
        "rule": {"kind": v.rule.kind, "layers": list(v.rule.layers), "value": v.rule.value},
        "shapes": list(v.shapes), "measured": v.measured,
        "location": [v.location.x, v.location.y],
    } for v in violations], indent=2)


# --- netlist extraction -------------------------------------------------------

@dataclass
class Device:
    name: str
    kind: str
    pins: dict[str, str]
    params: dict[str, float]
    pin_points: dict[str, Point] = field(default_factory=dict)


@dataclass
class Netlist:
    devices: list[Device]
    nets: set[str]

    def net_degree(self, net: str) -> int:
        return sum(1 for d in self.devices for n in d.pins.values() if n == net)


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def extract_netlist(design, tech: TechnologyData) -> Netlist:
    """Nets from conductor overlap (union-find), devices from generator metadata."""
    from .pcell import registry

    conductors = tech.conductors
    flat = [(ref, s) for ref, s in _flatten(design) if s.layer in conductors]
    uf = _UnionFind(len(flat))
    index_of = {ref: i for i, (ref, _) in enumerate(flat)}
    sweep = _XSweep(flat)
    for ref_a, sa, ref_b, sb in sweep.pairs(reach=0):
        if not tech.connected_layers(sa.layer, sb.layer):
            continue
        if shapes_intersect(sa, sb):
            uf.union(index_of[ref_a], index_of[ref_b])

    # name components: prefer explicit labels, else deterministic synthetics;
    # a label claimed by an earlier component gets a fragment suffix so two
    # disconnected pieces of one intended net stay distinguishable
    comp_members: dict[int, list[int]] = {}
    for i in range(len(flat)):
        comp_members.setdefault(uf.find(i), []).append(i)
    comp_name: dict[int, str] = {}
    taken: set[str] = set()
    anon = 0
    for root in sorted(comp_members, key=lambda r: min(flat[m][0] for m in comp_members[r])):
        labels = sorted({flat[m][1].net for m in comp_members[root]
                         if flat[m][1].net is not None})
        if labels:
            name = labels[0]
            k = 1
            while name in taken:
                k += 1
                name = f"{labels[0]}#{k}"
        else:
            name = f"n${anon}"
            anon += 1
        taken.add(name)
        comp_name[root] = name

    devices = []
    for inst in design:
        p = inst.cell.params
        if p is None or p.device not in registry:
            continue
        pins = {}
        points = {}
        for pin, members in inst.cell.pins.items():
            ref = f"{inst.instance_id}/{inst.cell.shape_index(members[0])}"
            pins[pin] = comp_name[uf.find(index_of[ref])]
            centers = [bbox(apply_transform(m, inst.transform)).center for m in members]
            points[pin] = Point(sum(c.x for c in centers) // len(centers),
                                sum(c.y for c in centers) // len(centers))
        width = p.wtot if p.device == "pmos20t" else p.w
        params = {"l": p.l / 1000, "w": width / 1000, "m": float(p.multiplier)}
        params["area"] = params["l"] * params["w"]
        params["perimeter"] = 2 * (params["l"] + params["w"])
        devices.append(Device(inst.instance_id, p.device, pins, params, points))
    nets = {n for d in devices for n in d.pins.values()}
    nets.update(comp_name[r] for r in comp_members)
    return Netlist(devices, nets)


# --- schematic parsing ----------------------------------------------------------

_UNIT = {"n": 1e-3, "u": 1.0, "m": 1e3}  # to um


def _parse_value(token: str, lineno: int) -> float:
    token = token.strip()
    try:
        if token and token[-1] in _UNIT:
            return float(token[:-1]) * _UNIT[token[-1]]
        return float(token)
    except ValueError:
        raise ParseError(f"bad value {token!r}", lineno) from None


def parse_schematic(text: str) -> Netlist:
    """One device per line: name kind net... l= w= m=; '#'/'*' comment lines."""
    from .pcell import registry

    devices = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("#", "*")):
            continue
        if line.lower() == ".end":
            break
        fields = line.split()
        name, kind = fields[0], fields[1] if len(fields) > 1 else None
        if kind not in registry:
            raise ParseError(f"unknown device kind {kind!r}", lineno)
        if name in seen:
            raise ParseError(f"duplicate device name {name!r}", lineno)
        seen.add(name)
        pin_names = registry[kind].pin_names
        nets = fields[2:2 + len(pin_names)]
        if len(nets) != len(pin_names):
            raise ParseError(f"{kind} needs {len(pin_names)} nets", lineno)
        params = {"m": 1.0}
        for token in fields[2 + len(pin_names):]:
            if "=" not in token:
                raise ParseError(f"expected key=value, got {token!r}", lineno)
            key, value = token.split("=", 1)
            params[key] = _parse_value(value, lineno)
        if "l" in params and "w" in params:
            params["area"] = params["l"] * params["w"]
            params["perimeter"] = 2 * (params["l"] + params["w"])
        devices.append(Device(name, kind, dict(zip(pin_names, nets)), params))
    nets = {n for d in devices for n in d.pins.values()}
    return Netlist(devices, nets)


# --- LVS -----------------------------------------------------------------------

@dataclass
class LvsReport:
    matched: bool
    device_mismatches: list[str]
    net_mismatches: list[str]
    fragmented_nodes: list[tuple[str, tuple[str, ...]]]

    def to_text(self) -> str:
        lines = ["LVS: MATCH" if self.matched else "LVS: MISMATCH"]
        lines += [f"device: {m}" for m in self.device_mismatches]
        lines += [f"net: {m}" for m in self.net_mismatches]
        lines += [f"fragmented node: {net} -> {', '.join(frags)}"
                  for net, frags in self.fragmented_nodes]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps({
            "matched": self.matched,
            "device_mismatches": self.device_mismatches,
            "net_mismatches": self.net_mismatches,
            "fragmented_nodes": [{"net": n, "fragments": list(f)}
                                 for n, f in self.fragmented_nodes],
        }, indent=2)


def _param_signature(params: dict) -> tuple:
    return tuple(sorted((k, float(f"{v:.6g}")) for k, v in params.items()
                        if k in ("l", "w", "m")))


def _canonical_labels(nl: Netlist, rounds: int = 4):
    """Weisfeiler-Lehman style refinement over the device/net incidence graph."""
    dev_label = {d.name: hash(("dev", d.kind, _param_signature(d.params)))
                 for d in nl.devices}
    net_label = {n: hash(("net",)) for n in nl.nets}
    for _ in range(rounds):
        new_net = {}
        for n in nl.nets:
            incident = sorted(hash((dev_label[d.name], pin))
                              for d in nl.devices for pin, nn in d.pins.items() if nn == n)
            new_net[n] = hash((net_label[n], tuple(incident)))
        new_dev = {}
        for d in nl.devices:
            incidence = tuple(sorted((pin, new_net[nn]) for pin, nn in d.pins.items()))
            new_dev[d.name] = hash((dev_label[d.name], incidence))
        dev_label, net_label = new_dev, new_net
    return dev_label, net_label


def _pair_groups(by_key_layout, by_key_schem, pairs, keys):
    lonely_layout, lonely_schem = [], []
    for key in keys:
        lgroup = by_key_layout.get(key, [])
        sgroup = by_key_schem.get(key, [])
        snames = {d.name: d for d in sgroup}
        rest_l = []
        for d in lgroup:
            if d.name in snames:
                pairs.append((d, snames.pop(d.name)))
            else:
                rest_l.append(d)
        rest_s = sorted(snames.values(), key=lambda d: d.name)
        rest_l.sort(key=lambda d: d.name)
        pairs.extend(zip(rest_l, rest_s))
        lonely_layout.extend(rest_l[len(rest_s):])
        lonely_schem.extend(rest_s[len(rest_l):])
    return lonely_layout, lonely_schem


def _match_devices(layout: Netlist, schem: Netlist):
    """Pair devices by canonical label; unmatched ones retry on kind+params.

    The fallback keeps the pairing usable when a wiring defect (fragmented or
    shorted net) perturbs every topological label downstream of it.
    """
    ll, _ = _canonical_labels(layout)
    sl, _ = _canonical_labels(schem)
    by_label_layout: dict[int, list[Device]] = {}
    for d in layout.devices:
        by_label_layout.setdefault(ll[d.name], []).append(d)
    by_label_schem: dict[int, list[Device]] = {}
    for d in schem.devices:
        by_label_schem.setdefault(sl[d.name], []).append(d)

    pairs: list[tuple[Device, Device]] = []
    keys = sorted(set(by_label_layout) | set(by_label_schem))
    lonely_layout, lonely_schem = _pair_groups(by_label_layout, by_label_schem, pairs, keys)

    if lonely_layout and lonely_schem:
        weak_l: dict[tuple, list[Device]] = {}
        for d in lonely_layout:
            weak_l.setdefault((d.kind, _param_signature(d.params)), []).append(d)
        weak_s: dict[tuple, list[Device]] = {}
        for d in lonely_schem:
            weak_s.setdefault((d.kind, _param_signature(d.params)), []).append(d)
        keys = sorted(set(weak_l) | set(weak_s), key=repr)
        lonely_layout, lonely_schem = _pair_groups(weak_l, weak_s, pairs, keys)
    return pairs, lonely_layout, lonely_schem


def compare_netlists(layout: Netlist, schem: Netlist) -> LvsReport:
    pairs, lonely_layout, lonely_schem = _match_devices(layout, schem)

    device_mismatches = []
    for d in lonely_layout:
        device_mismatches.append(f"layout {d.name} ({d.kind}) has no schematic match")
    for d in lonely_schem:
        device_mismatches.append(f"schematic {d.name} ({d.kind}) has no layout match")
    for ld, sd in pairs:
        if ld.kind != sd.kind:
            device_mismatches.append(f"{ld.name}: kind {ld.kind} vs {sd.kind}")
            continue
        for key in sorted(set(ld.params) & set(sd.params)):
            a, b = ld.params[key], sd.params[key]
            if abs(a - b) > PARAM_REL_TOL * max(abs(a), abs(b), 1e-30):
                device_mismatches.append(f"{ld.name}: {key}={a:g} vs {b:g}")

    # project schematic nets onto layout nets through paired device pins
    net_map: dict[str, set[str]] = {}
    layout_back: dict[str, set[str]] = {}
    for ld, sd in pairs:
        if ld.kind != sd.kind:
            continue
        for pin in set(ld.pins) & set(sd.pins):
            lnet, snet = ld.pins[pin], sd.pins[pin]
            net_map.setdefault(snet, set()).add(lnet)
            layout_back.setdefault(lnet, set()).add(snet)

    fragmented = [(snet, tuple(sorted(lnets)))
                  for snet, lnets in sorted(net_map.items()) if len(lnets) > 1]
    net_mismatches = [
        f"layout net {lnet} shorts schematic nets {', '.join(sorted(snets))}"
        for lnet, snets in sorted(layout_back.items()) if len(snets) > 1]

    matched = not device_mismatches and not net_mismatches and not fragmented
    return LvsReport(matched, device_mismatches, net_mismatches, fragmented)


# --- flylines --------------------------------------------------------------------

@dataclass(frozen=True)
class Flyline:
    net: str
    start: Point
    end: Point

    def length(self) -> float:
        return math.hypot(self.end.x - self.start.x, self.end.y - self.start.y)


def compute_flylines(design, schem: Netlist, tech: TechnologyData) -> list[Flyline]:
    """One MST edge set per schematic net split across layout fragments."""
    layout = extract_netlist(design, tech)
    pairs, _, _ = _match_devices(layout, schem)
    frags: dict[str, dict[str, list[Point]]] = {}
    for ld, sd in pairs:
        for pin in set(ld.pins) & set(sd.pins):
            snet = sd.pins[pin]
            frags.setdefault(snet, {}).setdefault(ld.pins[pin], []).append(
                ld.pin_points[pin])
    out = []
    for snet in sorted(frags):
        groups = frags[snet]
        if len(groups) < 2:
            continue
        centroids = []
        for lnet in sorted(groups):
            pts = groups[lnet]
            centroids.append(Point(sum(p.x for p in pts) // len(pts),
                                   sum(p.y for p in pts) // len(pts)))
        out.extend(_mst_edges(snet, centroids))
    return out


def _mst_edges(net: str, points: list[Point]) -> list[Flyline]:
    n = len(points)
    in_tree = [False] * n
    dist = [math.inf] * n
    parent = [-1] * n
    dist[0] = 0.0
    edges = []
    for _ in range(n):
        u = min((i for i in range(n) if not in_tree[i]), key=lambda i: dist[i])
        in_tree[u] = True
        if parent[u] >= 0:
            edges.append(Flyline(net, points[parent[u]], points[u]))
        for v in range(n):
            if not in_tree[v]:
                d = math.hypot(points[v].x - points[u].x, points[v].y - points[u].y)
                if d < dist[v]:
                    dist[v] = d
                    parent[v] = u
    return edges


# --- DBCOMP ----------------------------------------------------------------------

@dataclass
class CongruenceReport:
    missing_structures: list[str]
    layer_diffs: list[str]
    shape_diffs: list[str]

    @property
    def equal(self) -> bool:
        return not (self.missing_structures or self.layer_diffs or self.shape_diffs)

    def to_text(self) -> str:
        if self.equal:
            return "DBCOMP: congruent\n"
        lines = ["DBCOMP: different"]
        lines += [f"structure: {m}" for m in self.missing_structures]
        lines += [f"layer: {m}" for m in self.layer_diffs]
        lines += [f"shape: {m}" for m in self.shape_diffs]
        return "\n".join(lines) + "\n"


def _canon_ring(xy: tuple) -> tuple:
    pts = list(xy)
    if pts[0] == pts[-1]:
        pts = pts[:-1]
    area = 0
    n = len(pts)
    for i in range(n):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % n]
        area += x0 * y1 - x1 * y0
    if area < 0:
        pts.reverse()
    start = min(range(n), key=lambda i: pts[i])
    return tuple(pts[start:] + pts[:start])


def _canon_elements(structure) -> Counter:
    from .gdsio import Boundary, GdsPath, SRef

    out: Counter = Counter()
    for el in structure.elements:
        if isinstance(el, Boundary):
            out[("boundary", el.layer, el.datatype, _canon_ring(el.xy))] += 1
        elif isinstance(el, GdsPath):
            pts = tuple(el.xy)
            pts = min(pts, tuple(reversed(pts)))
            out[("path", el.layer, el.datatype, el.width, el.pathtype, pts)] += 1
        elif isinstance(el, SRef):
            out[("sref", el.name, (el.transform.translation.x, el.transform.translation.y),
                 el.transform.rotation, el.transform.mirror_x)] += 1
    return out


def dbcomp(a, b) -> CongruenceReport:
    """GDSII-level congruence of two libraries after canonicalization."""
    report = CongruenceReport([], [], [])
    names_a = {s.name: s for s in a.structures}
    names_b = {s.name: s for s in b.structures}
    for name in sorted(set(names_a) - set(names_b)):
        report.missing_structures.append(f"{name} only in first library")
    for name in sorted(set(names_b) - set(names_a)):
        report.missing_structures.append(f"{name} only in second library")
    if (a.user_unit_per_dbu, a.meters_per_dbu) != (b.user_unit_per_dbu, b.meters_per_dbu):
        report.layer_diffs.append(
            f"units differ: {a.user_unit_per_dbu}/{a.meters_per_dbu} vs "
            f"{b.user_unit_per_dbu}/{b.meters_per_dbu}")
    for name in sorted(set(names_a) & set(names_b)):
        ca = _canon_elements(names_a[name])
        cb = _canon_elements(names_b[name])
        if ca == cb:
            continue
        per_layer_a = Counter((k[1], k[2]) for k in ca.elements() if k[0] != "sref")
        per_layer_b = Counter((k[1], k[2]) for k in cb.elements() if k[0] != "sref")
        for key in sorted(set(per_layer_a) | set(per_layer_b)):
            if per_layer_a[key] != per_layer_b[key]:
                report.layer_diffs.append(
                    f"{name}: layer {key[0]}/{key[1]} has {per_layer_a[key]} vs "
                    f"{per_layer_b[key]} shapes")
        only_a = ca - cb
        only_b = cb - ca
        for key in sorted(only_a, key=repr):
            report.shape_diffs.append(f"{name}: {only_a[key]} x {key[0]} only in first")
        for key in sorted(only_b, key=repr):
            report.shape_diffs.append(f"{name}: {only_b[key]} x {key[0]} only in second")
    return report
