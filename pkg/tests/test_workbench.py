import json
import random

import pytest
from fastapi.testclient import TestClient

from cellforge import techdb
from cellforge.workbench.cli import main
from cellforge.workbench.service import create_app
from cellforge.workbench.session import Session, load_design

from oracles import decode_gds_records

TECH = str(techdb.demo_technology_path())

CHAIN_SCH = """\
M1 pmos20t g1 s1 d1 bulk l=1u w=5u m=1
M2 pmos20t g2 s1 d2 bulk l=1u w=5u m=1
"""


def chain_doc(with_strap=True):
    doc = {
        "instances": [
            {"id": "M1", "device": "pmos20t",
             "params": {"l": 1000, "w": 5000, "fingers": 1}, "at": [0, 0],
             "nets": {"G": "g1", "S": "s1", "D": "d1", "B": "bulk"}},
            {"id": "M2", "device": "pmos20t",
             "params": {"l": 1000, "w": 5000, "fingers": 1}, "at": [40000, 0],
             "nets": {"G": "g2", "S": "s1", "D": "d2", "B": "bulk"}},
        ],
        "straps": [
            {"layer": "met1", "rect": [5000, -4550, 41000, -3850], "net": "bulk"},
        ],
    }
    if with_strap:
        doc["straps"].append(
            {"layer": "met1", "rect": [5000, -1150, 41000, -450], "net": "s1"})
    return doc


class TestCli:
    def test_generate_writes_parsable_gds(self, tmp_path, capsys):
        out = tmp_path / "out.gds"
        code = main(["generate", "pmos20t", "--l", "1.0", "--w", "5.0",
                     "--fingers", "2", "--tech", TECH, "-o", str(out)])
        assert code == 0
        records = decode_gds_records(out.read_bytes())
        assert records[0][0] == "HEADER"
        assert any(name == "STRNAME" and payload == "PMOS20T"
                   for name, payload in records)

    def test_unknown_device_exit_2(self, tmp_path, capsys):
        code = main(["generate", "xmos", "--tech", TECH, "-o", str(tmp_path / "x.gds")])
        assert code == 2
        assert "xmos" in capsys.readouterr().err

    def test_fingers_zero_exit_2(self, tmp_path, capsys):
        code = main(["generate", "pmos20t", "--fingers", "0", "--tech", TECH,
                     "-o", str(tmp_path / "x.gds")])
        assert code == 2

    def test_drc_clean_design(self, tmp_path, capsys):
        design = tmp_path / "d.json"
        design.write_text(json.dumps(chain_doc()))
        assert main(["drc", str(design), "--tech", TECH]) == 0
        assert "clean" in capsys.readouterr().out

    def test_drc_violation_fixture(self, tmp_path, capsys):
        design = tmp_path / "bad.json"
        design.write_text(json.dumps({
            "instances": [],
            "straps": [{"layer": "poly1", "rect": [0, 0, 1000, 1000]},
                       {"layer": "poly1", "rect": [1499, 0, 2500, 1000]}],
        }))
        assert main(["drc", str(design), "--tech", TECH]) == 1
        out = capsys.readouterr().out
        assert "min_spacing" in out

    def test_drc_on_gds(self, tmp_path, capsys):
        out = tmp_path / "cell.gds"
        assert main(["generate", "respoly", "--tech", TECH, "-o", str(out)]) == 0
        capsys.readouterr()
        assert main(["drc", str(out), "--tech", TECH]) == 0

    def test_lvs_match(self, tmp_path, capsys):
        design = tmp_path / "d.json"
        design.write_text(json.dumps(chain_doc()))
        schem = tmp_path / "chain.net"
        schem.write_text(CHAIN_SCH)
        assert main(["lvs", str(design), str(schem), "--tech", TECH]) == 0
        assert "MATCH" in capsys.readouterr().out

    def test_lvs_fragmented(self, tmp_path, capsys):
        design = tmp_path / "d.json"
        design.write_text(json.dumps(chain_doc(with_strap=False)))
        schem = tmp_path / "chain.net"
        schem.write_text(CHAIN_SCH)
        assert main(["lvs", str(design), str(schem), "--tech", TECH]) == 1
        assert "fragmented" in capsys.readouterr().out

    def test_dbcomp_self(self, tmp_path, capsys):
        out = tmp_path / "a.gds"
        main(["generate", "capmim", "--tech", TECH, "-o", str(out)])
        assert main(["dbcomp", str(out), str(out)]) == 0

    def test_dbcomp_different(self, tmp_path, capsys):
        a = tmp_path / "a.gds"
        b = tmp_path / "b.gds"
        main(["generate", "capmim", "--tech", TECH, "-o", str(a)])
        main(["generate", "capmim", "--w", "12.0", "--tech", TECH, "-o", str(b)])
        assert main(["dbcomp", str(a), str(b)]) == 1

    def test_missing_file_exit_2(self, capsys):
        assert main(["drc", "nope.json", "--tech", TECH]) == 2


@pytest.fixture()
def client():
    return TestClient(create_app(Session(techdb.demo_technology())))


class TestService:
    def test_layers(self, client):
        r = client.get("/v1/tech/layers")
        assert r.status_code == 200
        assert len(r.json()) == 10

    def test_cell_lifecycle(self, client):
        r = client.post("/v1/cells", json={"device": "pmos20t",
                                           "params": {"fingers": 1, "w": 5000}})
        assert r.status_code == 200
        payload = r.json()
        assert payload["params"]["wtot"] == 5000
        assert {h["name"] for h in payload["handles"]} >= {"width_handle_left"}
        assert payload["pins"]["G"]

    def test_stretch_beyond_max_pins_at_max(self, client):
        cid = client.post("/v1/cells", json={"device": "pmos20t",
                                             "params": {"fingers": 1}}).json()["cell_id"]
        r = client.post(f"/v1/cells/{cid}/stretch",
                        json={"handle": "width_handle_right", "dx": 2 * 10**10, "dy": 0})
        assert r.status_code == 200
        assert r.json()["params"]["wtot"] == 10_000_000  # 10000.0 um

    def test_bad_schema_400(self, client):
        assert client.post("/v1/cells", json={}).status_code == 400
        cid = client.post("/v1/cells", json={"device": "capmim"}).json()["cell_id"]
        r = client.post(f"/v1/cells/{cid}/stretch", json={"handle": 5})
        assert r.status_code == 400

    def test_unknown_ids_404(self, client):
        assert client.get("/v1/cells/c99").status_code == 404
        assert client.post("/v1/design/move",
                           json={"instance_id": "i9", "x": 0, "y": 0}).status_code == 404

    def test_empty_design_drc(self, client):
        client.post("/v1/cells", json={"device": "pmos20t"})
        r = client.get("/v1/design/drc")
        assert r.status_code == 200
        assert r.json() == []

    def test_abut_flow_and_gap_rule(self, client):
        cid = client.post("/v1/cells", json={"device": "pmos20t",
                                             "params": {"fingers": 1, "w": 5000}}).json()["cell_id"]
        nets = {"G": "g1", "S": "mid", "D": "d1", "B": "b"}
        a = client.post("/v1/design/place",
                        json={"cell_id": cid, "x": 0, "y": 0, "nets": nets}).json()
        nets2 = {"G": "g2", "S": "mid", "D": "d2", "B": "b"}
        # diff faces sit 1200 dbu inside the placement: gap 0.5 um
        b = client.post("/v1/design/place",
                        json={"cell_id": cid, "x": 9900, "y": 0, "nets": nets2}).json()
        r = client.post("/v1/design/abut", json={"a": a["instance_id"],
                                                 "b": b["instance_id"]})
        assert r.status_code == 200
        assert r.json()["case"] == "NoAbut"
        # move within reach: gap 0.3 um
        client.post("/v1/design/move", json={"instance_id": b["instance_id"],
                                             "x": 9700, "y": 0})
        r = client.post("/v1/design/abut", json={"a": a["instance_id"],
                                                 "b": b["instance_id"]})
        assert r.json()["case"] == "Abut2PinEqual"
        r = client.post("/v1/design/unabut", json={"a": a["instance_id"],
                                                   "b": b["instance_id"]})
        assert r.status_code == 200
        r = client.post("/v1/design/unabut", json={"a": a["instance_id"],
                                                   "b": b["instance_id"]})
        assert r.status_code == 409

    def test_gds_download_parses(self, client):
        cid = client.post("/v1/cells", json={"device": "capmim"}).json()["cell_id"]
        client.post("/v1/design/place", json={"cell_id": cid, "x": 0, "y": 0})
        r = client.get("/v1/design/gds")
        assert r.status_code == 200
        assert decode_gds_records(r.content)[0][0] == "HEADER"

    def test_schematic_and_flylines(self, client):
        cid = client.post("/v1/cells", json={"device": "pmos20t",
                                             "params": {"fingers": 1, "w": 5000}}).json()["cell_id"]
        client.post("/v1/design/place",
                    json={"cell_id": cid, "x": 0, "y": 0,
                          "nets": {"G": "g1", "S": "s1", "D": "d1", "B": "b1"}})
        client.post("/v1/design/place",
                    json={"cell_id": cid, "x": 50000, "y": 0,
                          "nets": {"G": "g2", "S": "s1", "D": "d2", "B": "b2"}})
        assert client.get("/v1/design/flylines").json() == []
        sch = ("M1 pmos20t g1 s1 d1 b1 l=1u w=5u\n"
               "M2 pmos20t g2 s1 d2 b2 l=1u w=5u\n")
        r = client.post("/v1/schematic", json={"text": sch})
        assert r.status_code == 200
        flylines = client.get("/v1/design/flylines").json()
        assert len(flylines) == 1
        assert flylines[0]["net"] == "s1"


class TestServiceEqualsLibrary:
    """Every service mutation equals the corresponding library call."""

    def test_random_op_sequences(self):
        rng = random.Random(7)
        for _ in range(5):
            tech = techdb.demo_technology()
            session_http = Session(tech)
            client = TestClient(create_app(session_http))
            session_lib = Session(tech)

            devices = ["pmos20t", "respoly", "capmim"]
            cells = []
            for step in range(rng.randrange(3, 7)):
                op = rng.choice(["create", "stretch", "place"] if cells
                                else ["create"])
                if op == "create":
                    device = rng.choice(devices)
                    r = client.post("/v1/cells", json={"device": device})
                    assert r.status_code == 200
                    cells.append(r.json()["cell_id"])
                    assert session_lib.create_cell(device, {}) == cells[-1]
                elif op == "stretch":
                    cid = rng.choice(cells)
                    handles = session_lib.cells[cid].handles
                    if not handles:
                        continue
                    handle = rng.choice(handles).name
                    dx, dy = rng.randrange(-9000, 9000), rng.randrange(-9000, 9000)
                    r = client.post(f"/v1/cells/{cid}/stretch",
                                    json={"handle": handle, "dx": dx, "dy": dy})
                    assert r.status_code == 200
                    session_lib.stretch_cell(cid, handle, dx, dy)
                    assert r.json() == session_lib.cell_payload(cid)
                else:
                    cid = rng.choice(cells)
                    x, y = rng.randrange(0, 10**6), rng.randrange(0, 10**6)
                    r = client.post("/v1/design/place",
                                    json={"cell_id": cid, "x": x, "y": y})
                    assert r.status_code == 200
                    iid = session_lib.place(cid, x, y, {})
                    assert r.json() == session_lib.instance_payload(iid)

            for cid in cells:
                assert client.get(f"/v1/cells/{cid}").json() == session_lib.cell_payload(cid)


class TestJournalReplay:
    def test_replay_reproduces_design(self, tech):
        s = Session(tech)
        cid = s.create_cell("pmos20t", {"fingers": 1, "w": 5000})
        s.stretch_cell(cid, "width_handle_left", -1200, 0)
        nets = {"G": "g1", "S": "mid", "D": "d1", "B": "b"}
        a = s.place(cid, 0, 0, nets)
        b = s.place(cid, 10900, 0, {**nets, "G": "g2", "D": "d2"})
        s.abut(a, b)
        s.unabut(a, b)
        s.move(b, 10800, 0)
        s.abut(a, b)

        replayed = Session.replay(s.journal, tech)
        assert [s.instance_payload(i.instance_id) for i in s.design] == \
               [replayed.instance_payload(i.instance_id) for i in replayed.design]
        assert s.gds_bytes() == replayed.gds_bytes()


class TestDesignFiles:
    def test_load_design_round_trip_extract(self, tech, tmp_path):
        path = tmp_path / "d.json"
        path.write_text(json.dumps(chain_doc()))
        design = load_design(path, tech)
        assert [i.instance_id for i in design] == ["M1", "M2", "strap0", "strap1"]
