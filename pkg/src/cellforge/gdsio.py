"""Bit-exact GDSII stream reader and writer.

Records are big-endian: 2-byte length, 1-byte record type, 1-byte data type.
Timestamps are pinned to the epoch so the writer is byte-deterministic and
golden files stay stable.  Holes have no native GDSII form, so ring shapes
are written as a single keyhole-cut boundary with the cut at the hole's
lowest-leftmost vertex.
"""

from __future__ import annotations

import io
import math
import struct
import warnings
from dataclasses import dataclass

from .errors import (BadMagic, CoordinateOverflow, NameTooLong,
                     TruncatedRecord, UnmappedLayer, UnsupportedElement)
from .geometry import (OctagonWithHole, Path, Point, Polygon, Rect, Transform)

COORD_MIN = -(2**31)
COORD_MAX = 2**31 - 1

# record type bytes
_HEADER, _BGNLIB, _LIBNAME, _UNITS, _ENDLIB = 0x00, 0x01, 0x02, 0x03, 0x04
_BGNSTR, _STRNAME, _ENDSTR = 0x05, 0x06, 0x07
_BOUNDARY, _PATH, _SREF, _AREF, _TEXT = 0x08, 0x09, 0x0A, 0x0B, 0x0C
_LAYER, _DATATYPE, _WIDTH, _XY, _ENDEL, _SNAME = 0x0D, 0x0E, 0x0F, 0x10, 0x11, 0x12
_STRANS, _ANGLE, _PATHTYPE = 0x1A, 0x1C, 0x21

_EPOCH = (1970, 1, 1, 0, 0, 0)


@dataclass(frozen=True)
class Boundary:
    layer: int
    datatype: int
    xy: tuple[tuple[int, int], ...]  # closed: first point repeated last


@dataclass(frozen=True)
class GdsPath:
    layer: int
    datatype: int
    width: int
    pathtype: int
    xy: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class SRef:
    name: str
    transform: Transform


@dataclass(frozen=True)
class GdsStructure:
    name: str
    elements: tuple


@dataclass(frozen=True)
class GdsLibrary:
    name: str
    structures: tuple[GdsStructure, ...] = ()
    user_unit_per_dbu: float = 0.001
    meters_per_dbu: float = 1e-9


def _validate_name(name: str) -> str:
    if len(name) > 32:
        raise NameTooLong(f"structure name {name!r} exceeds 32 characters")
    if not name or any(ch not in "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_" for ch in name):
        raise NameTooLong(f"structure name {name!r} must be uppercase alphanumerics or _")
    return name


def _real8(value: float) -> bytes:
    """IBM hex-float: sign bit, excess-64 base-16 exponent, 56-bit mantissa."""
    if value == 0:
        return b"\x00" * 8
    sign = 0x80 if value < 0 else 0x00
    value = abs(value)
    fexp = math.log2(value) / 4
    exponent = math.ceil(fexp)
    if fexp == exponent:
        exponent += 1
    mantissa = int(value * 16.0 ** (14 - exponent))
    while mantissa >= 1 << 56:
        mantissa >>= 4
        exponent += 1
    byte1 = sign | (exponent + 64)
    return bytes([byte1]) + mantissa.to_bytes(7, "big")


def _real8_decode(raw: bytes) -> float:
    short1, short2, long3 = struct.unpack(">HHL", raw)
    exponent = (short1 & 0x7F00) // 256 - 64
    mantissa = (((short1 & 0x00FF) * 65536 + short2) * 4294967296 + long3) / float(1 << 56)
    value = mantissa * 16.0 ** exponent
    return -value if short1 & 0x8000 else value


def _record(rectype: int, datatype: int, payload: bytes = b"") -> bytes:
    return struct.pack(">HBB", 4 + len(payload), rectype, datatype) + payload


def _string_record(rectype: int, text: str) -> bytes:
    data = text.encode("ascii")
    if len(data) % 2:
        data += b"\x00"
    return _record(rectype, 0x06, data)


def _xy_record(points) -> bytes:
    flat = []
    for x, y in points:
        if not (COORD_MIN <= x <= COORD_MAX and COORD_MIN <= y <= COORD_MAX):
            raise CoordinateOverflow(f"coordinate ({x}, {y}) exceeds 32-bit range")
        flat += [x, y]
    return _record(_XY, 0x03, struct.pack(f">{len(flat)}l", *flat))


def write_gds(lib: GdsLibrary, sink) -> int:
    """Emit the library; returns the number of bytes written."""
    names = [s.name for s in lib.structures]
    if len(set(names)) != len(names):
        raise ValueError("structure names must be unique within a library")
    out = io.BytesIO()
    out.write(_record(_HEADER, 0x02, struct.pack(">h", 600)))
    out.write(_record(_BGNLIB, 0x02, struct.pack(">12h", *(_EPOCH * 2))))
    out.write(_string_record(_LIBNAME, lib.name))
    out.write(_record(_UNITS, 0x05,
                      _real8(lib.user_unit_per_dbu) + _real8(lib.meters_per_dbu)))
    for structure in lib.structures:
        _validate_name(structure.name)
        out.write(_record(_BGNSTR, 0x02, struct.pack(">12h", *(_EPOCH * 2))))
        out.write(_string_record(_STRNAME, structure.name))
        for el in structure.elements:
            if isinstance(el, Boundary):
                if el.xy[0] != el.xy[-1]:
                    raise ValueError("boundary ring must be closed")
                out.write(_record(_BOUNDARY, 0x00))
                out.write(_record(_LAYER, 0x02, struct.pack(">h", el.layer)))
                out.write(_record(_DATATYPE, 0x02, struct.pack(">h", el.datatype)))
                out.write(_xy_record(el.xy))
            elif isinstance(el, GdsPath):
                out.write(_record(_PATH, 0x00))
                out.write(_record(_LAYER, 0x02, struct.pack(">h", el.layer)))
                out.write(_record(_DATATYPE, 0x02, struct.pack(">h", el.datatype)))
                out.write(_record(_PATHTYPE, 0x02, struct.pack(">h", el.pathtype)))
                out.write(_record(_WIDTH, 0x03, struct.pack(">l", el.width)))
                out.write(_xy_record(el.xy))
            elif isinstance(el, SRef):
                out.write(_record(_SREF, 0x00))
                out.write(_string_record(_SNAME, el.name))
                flags = 0x8000 if el.transform.mirror_x else 0
                out.write(_record(_STRANS, 0x01, struct.pack(">H", flags)))
                out.write(_record(_ANGLE, 0x05, _real8(float(el.transform.rotation))))
                out.write(_xy_record([(el.transform.translation.x,
                                       el.transform.translation.y)]))
            else:
                raise UnsupportedElement(f"cannot write {type(el).__name__}")
            out.write(_record(_ENDEL, 0x00))
        out.write(_record(_ENDSTR, 0x00))
    out.write(_record(_ENDLIB, 0x00))
    data = out.getvalue()
    sink.write(data)
    return len(data)


def write_gds_bytes(lib: GdsLibrary) -> bytes:
    buf = io.BytesIO()
    write_gds(lib, buf)
    return buf.getvalue()


def _records(data: bytes):
    off = 0
    while off < len(data):
        if off + 4 > len(data):
            # trailing null padding to a block boundary is tolerated
            if all(b == 0 for b in data[off:]):
                return
            raise TruncatedRecord("dangling bytes after last record")
        size, rectype, datatype = struct.unpack(">HBB", data[off:off + 4])
        if size == 0:
            if all(b == 0 for b in data[off:]):
                return
            raise TruncatedRecord("zero-length record")
        if size < 4 or off + size > len(data):
            raise TruncatedRecord(f"record 0x{rectype:02X} runs past end of stream")
        body = data[off + 4:off + size]
        yield rectype, datatype, body
        off += size


def _decode_body(datatype: int, body: bytes):
    if datatype == 0x02:
        return list(struct.unpack(f">{len(body) // 2}h", body))
    if datatype == 0x03:
        return list(struct.unpack(f">{len(body) // 4}l", body))
    if datatype == 0x05:
        return [_real8_decode(body[i:i + 8]) for i in range(0, len(body), 8)]
    if datatype == 0x06:
        return body.rstrip(b"\x00").decode("ascii")
    if datatype == 0x01:
        return list(struct.unpack(f">{len(body) // 2}H", body))
    return body


def read_gds(source) -> GdsLibrary:
    """Parse a stream; read(write(lib)) is structurally equal to lib."""
    data = source if isinstance(source, (bytes, bytearray)) else source.read()
    it = _records(bytes(data))
    try:
        rectype, datatype, body = next(it)
    except StopIteration:
        raise BadMagic("empty stream") from None
    if rectype != _HEADER:
        raise BadMagic(f"first record is 0x{rectype:02X}, expected HEADER")

    lib_name = None
    units = (0.001, 1e-9)
    structures = []
    cur_struct_name = None
    cur_elements: list = []
    element: dict | None = None
    ended = False

    for rectype, datatype, body in it:
        value = _decode_body(datatype, body)
        if rectype == _BGNLIB:
            continue
        if rectype == _LIBNAME:
            lib_name = value
        elif rectype == _UNITS:
            units = (value[0], value[1])
        elif rectype == _BGNSTR:
            cur_elements = []
            cur_struct_name = None
        elif rectype == _STRNAME:
            cur_struct_name = value
        elif rectype == _ENDSTR:
            structures.append(GdsStructure(cur_struct_name, tuple(cur_elements)))
        elif rectype in (_BOUNDARY, _PATH, _SREF):
            element = {"kind": rectype, "pathtype": 0, "width": 0,
                       "strans": 0, "angle": 0.0}
        elif rectype == _AREF:
            raise UnsupportedElement("AREF elements are not supported")
        elif rectype == _TEXT:
            element = {"kind": _TEXT}
            warnings.warn("skipping TEXT element")
        elif rectype == _LAYER:
            element["layer"] = value[0]
        elif rectype == _DATATYPE:
            element["datatype"] = value[0]
        elif rectype == _PATHTYPE:
            element["pathtype"] = value[0]
        elif rectype == _WIDTH:
            element["width"] = value[0]
        elif rectype == _SNAME:
            element["sname"] = value
        elif rectype == _STRANS:
            element["strans"] = value[0]
        elif rectype == _ANGLE:
            element["angle"] = value[0]
        elif rectype == _XY:
            element["xy"] = tuple((value[i], value[i + 1]) for i in range(0, len(value), 2))
        elif rectype == _ENDEL:
            if element is None:
                raise TruncatedRecord("ENDEL without element")
            kind = element["kind"]
            if kind == _BOUNDARY:
                cur_elements.append(Boundary(element["layer"], element.get("datatype", 0),
                                             element["xy"]))
            elif kind == _PATH:
                cur_elements.append(GdsPath(element["layer"], element.get("datatype", 0),
                                            element["width"], element["pathtype"],
                                            element["xy"]))
            elif kind == _SREF:
                angle = element["angle"]
                rotation = int(round(angle)) % 360
                if rotation not in (0, 90, 180, 270) or abs(angle - round(angle)) > 1e-9:
                    raise UnsupportedElement(f"SREF angle {angle} not a quarter turn")
                x, y = element["xy"][0]
                cur_elements.append(SRef(element["sname"], Transform(
                    Point(x, y), rotation, bool(element["strans"] & 0x8000))))
            element = None
        elif rectype == _ENDLIB:
            ended = True
            break
        else:
            warnings.warn(f"skipping unknown record 0x{rectype:02X}")
    if not ended:
        raise TruncatedRecord("stream ended before ENDLIB")
    if lib_name is None:
        raise BadMagic("stream has no LIBNAME")
    return GdsLibrary(lib_name, tuple(structures), units[0], units[1])


# --- cell export ---------------------------------------------------------------

def _close(ring) -> tuple[tuple[int, int], ...]:
    pts = [(p.x, p.y) for p in ring]
    return tuple(pts + [pts[0]])


def _keyhole(oct_: OctagonWithHole) -> tuple[tuple[int, int], ...]:
    """Outer ring plus hole joined through a zero-width vertical cut."""
    outer = list(oct_.outer.vertices)
    hole = list(oct_.hole.vertices)
    if _ring_area(outer) < 0:
        outer.reverse()
    if _ring_area(hole) < 0:
        hole.reverse()
    h_start = min(range(len(hole)), key=lambda i: (hole[i].y, hole[i].x))
    h0 = hole[h_start]
    # bridge foot: nearest outer boundary point straight below the cut vertex
    best = None
    n = len(outer)
    for i in range(n):
        a, b = outer[i], outer[(i + 1) % n]
        if min(a.x, b.x) <= h0.x <= max(a.x, b.x):
            if a.x == b.x:
                candidates = [a.y, b.y]
            else:
                # integer for 45/90 edges
                candidates = [a.y + (b.y - a.y) * (h0.x - a.x) // (b.x - a.x)]
            for y in candidates:
                if y < h0.y and (best is None or y > best[0]):
                    best = (y, i)
    assert best is not None, "hole not above any outer edge"
    foot = Point(h0.x, best[0])
    seg = best[1]
    rotated = outer[seg + 1:] + outer[:seg + 1]  # CCW, ending at the bridge segment start
    ccw_from_h0 = hole[h_start:] + hole[:h_start]
    hole_cw = [ccw_from_h0[0]] + ccw_from_h0[1:][::-1]
    raw = [foot] + rotated + [foot] + hole_cw + [h0, foot]
    pts = [raw[0]]
    for p in raw[1:]:
        if p != pts[-1]:
            pts.append(p)
    if pts[-1] != pts[0]:
        pts.append(pts[0])
    return tuple((p.x, p.y) for p in pts)


def _ring_area(ring) -> float:
    s = 0
    n = len(ring)
    for i in range(n):
        a, b = ring[i], ring[(i + 1) % n]
        s += a.x * b.y - b.x * a.y
    return s / 2


def export_cell(cell, tech, name: str | None = None) -> GdsStructure:
    """Map a CellLayout's shapes to one GDS structure via the tech layer table."""
    elements = []
    for shape in cell.shapes:
        if shape.layer not in tech.layers:
            raise UnmappedLayer(f"layer {shape.layer!r} has no GDS mapping")
        lay = tech.layers[shape.layer]
        g = shape.geometry
        if isinstance(g, Rect):
            ring = (g.lo, Point(g.hi.x, g.lo.y), g.hi, Point(g.lo.x, g.hi.y))
            elements.append(Boundary(lay.gds_layer, lay.gds_datatype, _close(ring)))
        elif isinstance(g, Polygon):
            elements.append(Boundary(lay.gds_layer, lay.gds_datatype, _close(g.vertices)))
        elif isinstance(g, OctagonWithHole):
            xy = _keyhole(g)
            elements.append(Boundary(lay.gds_layer, lay.gds_datatype, xy))
        elif isinstance(g, Path):
            elements.append(GdsPath(lay.gds_layer, lay.gds_datatype, g.width, 0,
                                    tuple((p.x, p.y) for p in g.points)))
        else:
            raise UnsupportedElement(f"cannot export {type(g).__name__}")
    return GdsStructure(_validate_name(name or cell.name.upper()), tuple(elements))


def export_design(design, tech, top_name: str = "TOP") -> GdsLibrary:
    """One structure per distinct cell plus a top structure of SRefs."""
    structures = []
    names: dict[int, str] = {}
    used = set()
    for inst in design:
        if id(inst.cell) in names:
            continue
        base = "".join(ch if ch.isalnum() or ch == "_" else "_"
                       for ch in inst.cell.name.upper()) or "CELL"
        name = base[:28]
        k = 0
        while name in used:
            k += 1
            name = f"{base[:28]}_{k}"
        used.add(name)
        names[id(inst.cell)] = name
        structures.append(export_cell(inst.cell, tech, name))
    refs = tuple(SRef(names[id(inst.cell)], inst.transform) for inst in design)
    structures.append(GdsStructure(_validate_name(top_name), refs))
    return GdsLibrary("CELLFORGE", tuple(structures))
