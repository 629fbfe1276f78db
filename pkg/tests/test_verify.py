from dataclasses import replace

import pytest

from cellforge import gdsio, pcell, verify
from cellforge.errors import ParseError
from cellforge.geometry import (Point, Rect, Shape, Transform, bbox,
                                min_spacing)
from cellforge.pcell import evaluate_params, strap
from cellforge.pcell.cell import CellLayout
from cellforge.verify import (compare_netlists, compute_flylines, dbcomp,
                              extract_netlist, parse_schematic, run_drc)

from conftest import place
from oracles import connected_component_count, exhaustive_mst_length


def raw_cell(*shapes, name="fixture"):
    return CellLayout(name, None, list(shapes), {})


def mos_cell(tech, **overrides):
    params = replace(pcell.defaults("pmos20t", tech), wtot=None, **overrides)
    return pcell.generate(evaluate_params(params, tech), tech)


class TestDrcFixtures:
    def test_empty_design(self, tech):
        assert run_drc([], tech) == []

    def test_generated_mos_clean(self, tech, mos_cell):
        assert run_drc([place(mos_cell)], tech) == []

    def test_spacing_violation(self, tech):
        cell = raw_cell(Shape("poly1", Rect.from_bounds(0, 0, 1000, 1000)),
                        Shape("poly1", Rect.from_bounds(1499, 0, 2500, 1000)))
        violations = run_drc([place(cell)], tech)
        assert len(violations) == 1
        v = violations[0]
        assert v.rule.kind == "min_spacing"
        assert v.measured == 499

    def test_width_violation_measures_actual(self, tech):
        cell = raw_cell(Shape("met1", Rect.from_bounds(0, 0, 400, 5000)))
        violations = run_drc([place(cell)], tech)
        assert len(violations) == 1
        assert violations[0].rule.kind == "min_width"
        assert violations[0].measured == 400

    def test_enclosure_violation(self, tech):
        cell = raw_cell(Shape("diff", Rect.from_bounds(0, 0, 700, 700)),
                        Shape("cont", Rect.from_bounds(100, 150, 500, 550)))
        violations = run_drc([place(cell)], tech)
        assert len(violations) == 1
        assert violations[0].rule.kind == "min_enclosure"
        assert violations[0].measured == 100

    def test_enclosure_not_applicable_without_outer(self, tech):
        # a lone contact is not subject to any enclosure rule
        cell = raw_cell(Shape("cont", Rect.from_bounds(0, 0, 400, 400)))
        assert run_drc([place(cell)], tech) == []

    def test_cross_layer_overlap_violation(self, tech):
        cell = raw_cell(Shape("pimp", Rect.from_bounds(0, 0, 2000, 2000)),
                        Shape("nimp", Rect.from_bounds(1500, 0, 3500, 2000)))
        violations = run_drc([place(cell)], tech)
        assert [v.rule.kind for v in violations] == ["min_spacing"]
        assert violations[0].measured == 0

    def test_same_layer_touching_is_merged(self, tech):
        cell = raw_cell(Shape("met1", Rect.from_bounds(0, 0, 1000, 1000)),
                        Shape("met1", Rect.from_bounds(1000, 0, 2000, 1000)))
        assert run_drc([place(cell)], tech) == []

    def test_extension_violation(self, tech):
        cell = raw_cell(Shape("poly1", Rect.from_bounds(0, 0, 2000, 500)),
                        Shape("pimp", Rect.from_bounds(-1000, 0, 1700, 500)))
        violations = run_drc([place(cell)], tech)
        assert len(violations) == 1
        assert violations[0].rule.kind == "min_extension"
        assert violations[0].measured == 300

    def test_translation_invariance(self, tech):
        cell = raw_cell(Shape("poly1", Rect.from_bounds(0, 0, 1000, 1000)),
                        Shape("poly1", Rect.from_bounds(1400, 0, 2500, 1000)),
                        Shape("met1", Rect.from_bounds(0, 2000, 300, 2400)))
        a = run_drc([place(cell)], tech)
        b = run_drc([place(cell, x=70000, y=-3000)], tech)
        assert len(a) == len(b) == 2
        assert [(v.rule.kind, v.measured) for v in a] == [(v.rule.kind, v.measured) for v in b]

    def test_deterministic_order(self, tech):
        cell = raw_cell(Shape("met1", Rect.from_bounds(0, 0, 300, 300)),
                        Shape("met1", Rect.from_bounds(5000, 0, 5300, 300)),
                        Shape("poly1", Rect.from_bounds(0, 2000, 400, 2400)))
        assert run_drc([place(cell)], tech) == run_drc([place(cell)], tech)


def brute_force_spacing(design, tech):
    """All-pairs spacing oracle over the flattened design (<= ~200 shapes)."""
    flat = verify._flatten(design)
    found = set()
    for r in tech.rules.values():
        if r.kind != "min_spacing":
            continue
        la, lb = r.layers
        same = la == lb
        for i, (ref_a, sa) in enumerate(flat):
            if sa.layer != la:
                continue
            for ref_b, sb in (flat[i + 1:] if same else flat):
                if sb.layer != lb or ref_a == ref_b:
                    continue
                d = min_spacing(sa, sb)
                if d >= r.value or (same and d == 0):
                    continue
                found.add((r.kind, tuple(sorted((ref_a, ref_b)))))
    return found


class TestDrcAgainstBruteForce:
    @pytest.mark.parametrize("builder", [
        lambda tech: [place(raw_cell(
            Shape("poly1", Rect.from_bounds(0, 0, 1000, 1000)),
            Shape("poly1", Rect.from_bounds(1499, 0, 2500, 1000)),
            Shape("poly1", Rect.from_bounds(0, 1300, 1000, 2400)),
            Shape("met1", Rect.from_bounds(0, 0, 600, 600)),
            Shape("met1", Rect.from_bounds(899, 0, 1500, 600)),
            Shape("cont", Rect.from_bounds(5000, 5000, 5400, 5400)),
            Shape("cont", Rect.from_bounds(5500, 5000, 5900, 5400))))],
        lambda tech: [place(mos_cell(tech, fingers=1, w=3000))],
        lambda tech: [place(mos_cell(tech, fingers=1, w=2000), instance_id="x"),
                      place(raw_cell(Shape("met1", Rect.from_bounds(-4000, -6000,
                                                                    -3600, -5000))),
                            instance_id="y")],
    ])
    def test_spacing_sets_agree(self, tech, builder):
        design = builder(tech)
        flat_count = sum(len(i.cell.shapes) for i in design)
        assert flat_count <= 200
        engine = {(v.rule.kind, v.shapes) for v in run_drc(design, tech)
                  if v.rule.kind == "min_spacing"}
        assert engine == brute_force_spacing(design, tech)


def chain_design(tech, schematic=True):
    """Two transistors with strapped source and bulk nets; matches CHAIN_SCH."""
    cell = mos_cell(tech, fingers=1, w=5000)
    m1 = place(cell, 0, 0, "M1", {"G": "g1", "S": "s1", "D": "d1", "B": "bulk"})
    m2 = place(cell, 40000, 0, "M2", {"G": "g2", "S": "s1", "D": "d2", "B": "bulk"})
    s_strap = place(strap("met1", Rect.from_bounds(5000, -1150, 41000, -450), "s1"),
                    0, 0, "RS")
    b_strap = place(strap("met1", Rect.from_bounds(5000, -4550, 41000, -3850), "bulk"),
                    0, 0, "RB")
    return [m1, m2, s_strap, b_strap]


CHAIN_SCH = """\
* two-transistor chain
M1 pmos20t g1 s1 d1 bulk l=1u w=5u m=1
M2 pmos20t g2 s1 d2 bulk l=1u w=5u m=1
.end
"""


class TestExtraction:
    def test_shared_strap_merges_nets(self, tech):
        nl = extract_netlist(chain_design(tech), tech)
        m1 = next(d for d in nl.devices if d.name == "M1")
        m2 = next(d for d in nl.devices if d.name == "M2")
        assert m1.pins["S"] == m2.pins["S"]
        assert m1.pins["B"] == m2.pins["B"]
        assert m1.pins["D"] != m2.pins["D"]

    def test_isolated_instance_pins_distinct(self, tech, mos_cell):
        nl = extract_netlist([place(mos_cell, instance_id="M1")], tech)
        dev = nl.devices[0]
        assert len(set(dev.pins.values())) == 4

    def test_component_count_matches_oracle(self, tech):
        design = chain_design(tech)
        nl = extract_netlist(design, tech)
        flat = [(ref, s) for ref, s in verify._flatten(design)
                if s.layer in tech.conductors]

        def overlaps(a, b):
            return (tech.connected_layers(a[1].layer, b[1].layer)
                    and min_spacing(a[1], b[1]) == 0)

        comps = connected_component_count(flat, overlaps)
        assert len(nl.nets) == comps

    def test_abutted_pair_shares_source(self, tech):
        from cellforge.interact import apply_abutment, detect_abutment

        cell = mos_cell(tech, fingers=1, w=5000)
        face = bbox(cell.shapes[cell.abut_specs[0].shape_ref])
        a = place(cell, 0, 0, "A", {"S": "mid", "G": "g1", "D": "d1", "B": "b1"})
        b = place(mos_cell(tech, fingers=1, w=5000), face.hi.x + 100 - face.lo.x, 0,
                  "B", {"S": "mid", "G": "g2", "D": "d2", "B": "b2"})
        apply_abutment(a, b, detect_abutment(a, b), tech)
        nl = extract_netlist([a, b], tech)
        da = next(d for d in nl.devices if d.name == "A")
        db = next(d for d in nl.devices if d.name == "B")
        assert da.pins["S"] == db.pins["S"]


class TestParseSchematic:
    def test_single_device(self):
        nl = parse_schematic("M1 pmos20t G S D B l=1u w=5u")
        assert len(nl.devices) == 1
        assert nl.devices[0].pins == {"G": "G", "S": "S", "D": "D", "B": "B"}
        assert nl.devices[0].params["l"] == 1.0
        assert nl.devices[0].params["w"] == 5.0
        assert nl.nets == {"G", "S", "D", "B"}

    def test_duplicate_name(self):
        with pytest.raises(ParseError):
            parse_schematic("M1 pmos20t a b c d l=1u w=5u\nM1 pmos20t a b c d l=1u w=5u")

    def test_chain_fixture(self):
        nl = parse_schematic(CHAIN_SCH)
        assert len(nl.devices) == 2
        assert nl.nets == {"g1", "g2", "s1", "d1", "d2", "bulk"}

    def test_unit_suffixes(self):
        nl = parse_schematic("R1 respoly a b l=20u w=500n")
        assert nl.devices[0].params["l"] == 20.0
        assert nl.devices[0].params["w"] == 0.5

    def test_unknown_kind(self):
        with pytest.raises(ParseError):
            parse_schematic("X1 wat a b")


class TestLvs:
    def test_self_consistent_chain_matches(self, tech):
        layout = extract_netlist(chain_design(tech), tech)
        schem = parse_schematic(CHAIN_SCH)
        report = compare_netlists(layout, schem)
        assert report.matched, report.to_text()

    def test_reflexive(self, tech):
        nl = extract_netlist(chain_design(tech), tech)
        assert compare_netlists(nl, nl).matched

    def test_deleted_strap_fragments_net(self, tech):
        design = [inst for inst in chain_design(tech) if inst.instance_id != "RS"]
        report = compare_netlists(extract_netlist(design, tech),
                                  parse_schematic(CHAIN_SCH))
        assert not report.matched
        assert len(report.fragmented_nodes) == 1
        assert report.fragmented_nodes[0][0] == "s1"
        assert len(report.fragmented_nodes[0][1]) == 2

    def test_kind_mismatch(self, tech):
        layout = extract_netlist(chain_design(tech), tech)
        schem = parse_schematic(CHAIN_SCH.replace("M2 pmos20t g2 s1 d2 bulk l=1u w=5u m=1",
                                                  "M2 respoly g2 s1 l=1u w=5u"))
        report = compare_netlists(layout, schem)
        assert not report.matched
        assert report.device_mismatches

    def test_param_mismatch(self, tech):
        layout = extract_netlist(chain_design(tech), tech)
        schem = parse_schematic(CHAIN_SCH.replace("M2 pmos20t g2 s1 d2 bulk l=1u w=5u",
                                                  "M2 pmos20t g2 s1 d2 bulk l=1.5u w=5u"))
        report = compare_netlists(layout, schem)
        assert not report.matched
        assert any("M2" in m for m in report.device_mismatches)

    def test_param_within_tolerance(self, tech):
        layout = extract_netlist(chain_design(tech), tech)
        schem = parse_schematic(CHAIN_SCH.replace("l=1u", "l=1.0000000001u"))
        assert compare_netlists(layout, schem).matched

    def test_matched_is_symmetric(self, tech):
        layout = extract_netlist(chain_design(tech), tech)
        schem = parse_schematic(CHAIN_SCH)
        assert compare_netlists(layout, schem).matched == \
               compare_netlists(schem, layout).matched
        broken = extract_netlist(
            [i for i in chain_design(tech) if i.instance_id != "RS"], tech)
        assert compare_netlists(broken, schem).matched == \
               compare_netlists(schem, broken).matched is False

    def test_extraction_shape_order_independent(self, tech):
        design = chain_design(tech)
        nl_a = extract_netlist(design, tech)
        shuffled = []
        for inst in design:
            cell = CellLayout(inst.cell.name, inst.cell.params,
                              list(reversed(inst.cell.shapes)), inst.cell.pins,
                              dict(inst.cell.connection_kind))
            shuffled.append(place(cell, inst.transform.translation.x,
                                  inst.transform.translation.y, inst.instance_id,
                                  inst.pin_nets))
        nl_b = extract_netlist(shuffled, tech)
        assert compare_netlists(nl_a, nl_b).matched

    def test_report_serialization(self, tech):
        design = [i for i in chain_design(tech) if i.instance_id != "RS"]
        report = compare_netlists(extract_netlist(design, tech),
                                  parse_schematic(CHAIN_SCH))
        text = report.to_text()
        assert "MISMATCH" in text and "fragmented node: s1" in text
        import json

        doc = json.loads(report.to_json())
        assert doc["matched"] is False
        assert doc["fragmented_nodes"][0]["net"] == "s1"

    def test_violation_serialization(self, tech):
        from cellforge.verify import violations_to_json, violations_to_text

        cell = raw_cell(Shape("met1", Rect.from_bounds(0, 0, 400, 5000)))
        violations = run_drc([place(cell)], tech)
        assert "min_width" in violations_to_text(violations)
        import json

        doc = json.loads(violations_to_json(violations))
        assert doc[0]["rule"]["kind"] == "min_width"
        assert doc[0]["measured"] == 400


class TestFlylines:
    def test_fully_connected_none(self, tech):
        flylines = compute_flylines(chain_design(tech), parse_schematic(CHAIN_SCH), tech)
        assert flylines == []

    def test_split_in_two_one_flyline(self, tech):
        design = [inst for inst in chain_design(tech) if inst.instance_id != "RS"]
        flylines = compute_flylines(design, parse_schematic(CHAIN_SCH), tech)
        assert len(flylines) == 1
        assert flylines[0].net == "s1"

    def test_four_fragments_mst_matches_oracle(self, tech):
        cell = mos_cell(tech, fingers=1, w=5000)
        positions = [(0, 0), (40000, 5000), (75000, -11000), (110000, 2000)]
        design = [place(cell, x, y, f"M{k}", {"S": "s", "G": f"g{k}", "D": f"d{k}",
                                              "B": f"b{k}"})
                  for k, (x, y) in enumerate(positions, start=1)]
        sch = "\n".join(
            f"M{k} pmos20t g{k} s d{k} b{k} l=1u w=5u" for k in range(1, 5))
        flylines = compute_flylines(design, parse_schematic(sch), tech)
        assert len(flylines) == 3
        nl = extract_netlist(design, tech)
        pts = []
        for k in range(1, 5):
            dev = next(d for d in nl.devices if d.name == f"M{k}")
            pts.append((dev.pin_points["S"].x, dev.pin_points["S"].y))
        oracle = exhaustive_mst_length(pts)
        assert sum(f.length() for f in flylines) == pytest.approx(oracle)


class TestDbcomp:
    def lib(self, tech, cell, name="CELL"):
        return gdsio.GdsLibrary("T", (gdsio.export_cell(cell, tech, name),))

    def test_reflexive(self, tech, mos_cell):
        lib = self.lib(tech, mos_cell)
        assert dbcomp(lib, lib).equal

    def test_vertex_rotation_canonicalized(self):
        ring1 = ((0, 0), (10, 0), (10, 10), (0, 10), (0, 0))
        ring2 = ((10, 10), (0, 10), (0, 0), (10, 0), (10, 10))
        a = gdsio.GdsLibrary("T", (gdsio.GdsStructure("S", (gdsio.Boundary(1, 0, ring1),)),))
        b = gdsio.GdsLibrary("T", (gdsio.GdsStructure("S", (gdsio.Boundary(1, 0, ring2),)),))
        assert dbcomp(a, b).equal

    def test_orientation_canonicalized(self):
        cw = ((0, 0), (0, 10), (10, 10), (10, 0), (0, 0))
        ccw = ((0, 0), (10, 0), (10, 10), (0, 10), (0, 0))
        a = gdsio.GdsLibrary("T", (gdsio.GdsStructure("S", (gdsio.Boundary(1, 0, cw),)),))
        b = gdsio.GdsLibrary("T", (gdsio.GdsStructure("S", (gdsio.Boundary(1, 0, ccw),)),))
        assert dbcomp(a, b).equal

    def test_single_dbu_move_detected(self, tech, mos_cell):
        lib_a = self.lib(tech, mos_cell)
        st = lib_a.structures[0]
        moved = []
        for i, el in enumerate(st.elements):
            if i == 7 and isinstance(el, gdsio.Boundary):
                moved.append(gdsio.Boundary(el.layer, el.datatype,
                                            tuple((x + 1, y) for x, y in el.xy)))
            else:
                moved.append(el)
        lib_b = gdsio.GdsLibrary("T", (gdsio.GdsStructure(st.name, tuple(moved)),))
        report = dbcomp(lib_a, lib_b)
        assert not report.equal
        assert len(report.shape_diffs) == 2  # one element each side of the diff

    def test_missing_structure(self, tech, mos_cell):
        lib_a = self.lib(tech, mos_cell)
        lib_b = gdsio.GdsLibrary("T", ())
        report = dbcomp(lib_a, lib_b)
        assert not report.equal
        assert report.missing_structures

    def test_symmetric(self, tech, mos_cell):
        lib_a = self.lib(tech, mos_cell)
        lib_b = gdsio.GdsLibrary("T", ())
        assert dbcomp(lib_a, lib_b).equal == dbcomp(lib_b, lib_a).equal

    def test_sref_compare(self):
        t1 = Transform(Point(5, 5), 90, False)
        a = gdsio.GdsLibrary("T", (gdsio.GdsStructure("S", (gdsio.SRef("X", t1),)),))
        b = gdsio.GdsLibrary("T", (gdsio.GdsStructure("S", (gdsio.SRef("X", t1),)),))
        assert dbcomp(a, b).equal
        c = gdsio.GdsLibrary("T", (gdsio.GdsStructure(
            "S", (gdsio.SRef("X", Transform(Point(5, 6), 90, False)),)),))
        assert not dbcomp(a, c).equal

    def test_transitivity_spot_check(self):
        # same layout written with three different vertex conventions
        rings = [
            ((0, 0), (10, 0), (10, 10), (0, 10), (0, 0)),
            ((10, 0), (10, 10), (0, 10), (0, 0), (10, 0)),
            ((0, 0), (0, 10), (10, 10), (10, 0), (0, 0)),
        ]
        libs = [gdsio.GdsLibrary("T", (gdsio.GdsStructure(
            "S", (gdsio.Boundary(1, 0, r),)),)) for r in rings]
        assert dbcomp(libs[0], libs[1]).equal
        assert dbcomp(libs[1], libs[2]).equal
        assert dbcomp(libs[0], libs[2]).equal
