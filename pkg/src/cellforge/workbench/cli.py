"""Command line front end: generate, drc, lvs, dbcomp, serve.

Exit codes: 0 success/clean, 1 findings (violations, mismatch, non-congruent),
2 usage or input errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .. import gdsio, pcell, verify
from ..errors import CellforgeError
from ..geometry import Shape, um
from ..interact import PlacedInstance
from ..techdb import TechnologyData, load_technology_file
from .session import load_design


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="cellforge")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a device and write GDS")
    gen.add_argument("device")
    gen.add_argument("--tech", required=True)
    gen.add_argument("-o", "--output", required=True)
    gen.add_argument("--name", help="GDS structure name (default: device name)")
    gen.add_argument("--l", type=float, help="channel/body length in um")
    gen.add_argument("--w", type=float, help="finger/plate width in um")
    gen.add_argument("--wtot", type=float, help="total width in um")
    gen.add_argument("--fingers", type=int)
    gen.add_argument("--multiplier", type=int)
    gen.add_argument("--guard-ring", dest="guard_ring", default=None)
    gen.add_argument("--bends", type=int)

    drc = sub.add_parser("drc", help="run DRC over a design file or GDS")
    drc.add_argument("design")
    drc.add_argument("--tech", required=True)
    drc.add_argument("--json", action="store_true")

    lvs = sub.add_parser("lvs", help="compare an extracted design to a schematic")
    lvs.add_argument("design")
    lvs.add_argument("schematic")
    lvs.add_argument("--tech", required=True)
    lvs.add_argument("--json", action="store_true")

    dbc = sub.add_parser("dbcomp", help="compare two GDS files for congruence")
    dbc.add_argument("first")
    dbc.add_argument("second")

    srv = sub.add_parser("serve", help="run the workbench HTTP service")
    srv.add_argument("--tech", required=True)
    srv.add_argument("--port", type=int, default=8472)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--static", default=None, help="studio dist directory to serve")

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0

    try:
        return _dispatch(args)
    except (CellforgeError, OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _load_tech(path: str) -> TechnologyData:
    return load_technology_file(path)


def _dispatch(args) -> int:
    if args.command == "generate":
        return _generate(args)
    if args.command == "drc":
        return _drc(args)
    if args.command == "lvs":
        return _lvs(args)
    if args.command == "dbcomp":
        return _dbcomp(args)
    if args.command == "serve":
        from .service import serve

        serve(_load_tech(args.tech), port=args.port, host=args.host,
              static_dir=args.static)
        return 0
    return 2


def _generate(args) -> int:
    tech = _load_tech(args.tech)
    defaults = pcell.defaults(args.device, tech)
    raw = {
        "l": um(args.l) if args.l is not None else defaults.l,
        "fingers": args.fingers if args.fingers is not None else defaults.fingers,
        "multiplier": (args.multiplier if args.multiplier is not None
                       else defaults.multiplier),
        "guard_ring": args.guard_ring if args.guard_ring is not None else defaults.guard_ring,
        "bends": args.bends if args.bends is not None else defaults.bends,
    }
    if args.wtot is not None:
        raw["wtot"] = um(args.wtot)
        if args.w is not None:
            raw["w"] = um(args.w)
    else:
        raw["w"] = um(args.w) if args.w is not None else defaults.w
    params = pcell.evaluate_params(pcell.DeviceParams(device=args.device, **raw), tech)
    cell = pcell.generate(params, tech)
    name = args.name or args.device.upper()
    lib = gdsio.GdsLibrary("CELLFORGE", (gdsio.export_cell(cell, tech, name),))
    with open(args.output, "wb") as sink:
        gdsio.write_gds(lib, sink)
    print(f"{args.device}: {len(cell.shapes)} shapes -> {args.output}")
    return 0


def _load_design_any(path: str, tech) -> list[PlacedInstance]:
    if path.endswith(".json"):
        return load_design(path, tech)
    lib = gdsio.read_gds(Path(path).read_bytes())
    return _design_from_gds(lib, tech)


def _design_from_gds(lib: gdsio.GdsLibrary, tech) -> list[PlacedInstance]:
    """Flatten a GDS library into raw-shape instances for DRC."""
    from ..geometry import Point, Polygon, Rect, Transform
    from ..geometry import Path as GPath
    from ..pcell.cell import CellLayout

    by_gds = {(lay.gds_layer, lay.gds_datatype): lay.name
              for lay in tech.layers.values()}
    structures = {s.name: s for s in lib.structures}
    referenced = {el.name for s in lib.structures for el in s.elements
                  if isinstance(el, gdsio.SRef)}
    tops = [s for s in lib.structures if s.name not in referenced] or list(lib.structures)

    design = []
    counter = 0

    def emit(structure, transform):
        nonlocal counter
        shapes = []
        for el in structure.elements:
            if isinstance(el, gdsio.SRef):
                emit(structures[el.name], transform.compose(el.transform))
                continue
            layer = by_gds.get((el.layer, el.datatype))
            if layer is None:
                continue
            if isinstance(el, gdsio.Boundary):
                pts = [Point(x, y) for x, y in el.xy[:-1]]
                if len(pts) == 4 and pts[0].x == pts[3].x and pts[1].x == pts[2].x \
                        and pts[0].y == pts[1].y and pts[2].y == pts[3].y:
                    geom = Rect.from_bounds(pts[0].x, pts[0].y, pts[2].x, pts[2].y)
                else:
                    geom = Polygon(tuple(pts))
            else:
                geom = GPath(tuple(Point(x, y) for x, y in el.xy), el.width)
            shapes.append(Shape(layer, geom))
        if shapes:
            counter += 1
            cell = CellLayout(structure.name, None, shapes, {})
            design.append(PlacedInstance(cell, transform, f"g{counter}"))

    for top in tops:
        emit(top, Transform())
    return design


def _drc(args) -> int:
    tech = _load_tech(args.tech)
    design = _load_design_any(args.design, tech)
    violations = verify.run_drc(design, tech)
    if args.json:
        print(verify.violations_to_json(violations))
    else:
        print(verify.violations_to_text(violations), end="")
    return 1 if violations else 0


def _lvs(args) -> int:
    tech = _load_tech(args.tech)
    design = load_design(args.design, tech)
    layout_nl = verify.extract_netlist(design, tech)
    schem_nl = verify.parse_schematic(Path(args.schematic).read_text())
    report = verify.compare_netlists(layout_nl, schem_nl)
    print(report.to_json() if args.json else report.to_text(), end="")
    return 0 if report.matched else 1


def _dbcomp(args) -> int:
    a = gdsio.read_gds(Path(args.first).read_bytes())
    b = gdsio.read_gds(Path(args.second).read_bytes())
    report = verify.dbcomp(a, b)
    print(report.to_text(), end="")
    return 0 if report.equal else 1


if __name__ == "__main__":
    sys.exit(main())
