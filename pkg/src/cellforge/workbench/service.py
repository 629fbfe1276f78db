"""JSON-over-HTTP service for the studio: a thin shell over Session.

Single session per process; mutations run under one lock.  All geometry in
payloads is integer dbu.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from ..errors import CellforgeError, IncompatibleCase, NotAbutted
from .session import Session


def create_app(session: Session, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="cellforge workbench", version="1")
    lock = threading.Lock()

    @app.exception_handler(CellforgeError)
    async def _domain_error(request: Request, exc: CellforgeError):
        status = 409 if isinstance(exc, (NotAbutted, IncompatibleCase)) else 400
        return JSONResponse(status_code=status, content={"error": str(exc)})

    @app.exception_handler(KeyError)
    async def _missing(request: Request, exc: KeyError):
        return JSONResponse(status_code=404, content={"error": str(exc)})

    def field(body: dict, name: str, kinds, required=True, default=None):
        if name not in body:
            if required:
                raise HTTPException(400, f"missing field {name!r}")
            return default
        value = body[name]
        if kinds is not None and not isinstance(value, kinds):
            raise HTTPException(400, f"field {name!r} has wrong type")
        return value

    @app.get("/v1/tech/layers")
    def tech_layers():
        return [{"name": lay.name, "gds_layer": lay.gds_layer,
                 "gds_datatype": lay.gds_datatype, "purpose": lay.purpose}
                for lay in sorted(session.tech.layers.values(), key=lambda l: l.gds_layer)]

    @app.post("/v1/cells")
    async def create_cell(request: Request):
        body = await request.json()
        device = field(body, "device", str)
        params = field(body, "params", dict, required=False, default={})
        with lock:
            cell_id = session.create_cell(device, params)
            return session.cell_payload(cell_id)

    @app.get("/v1/cells/{cell_id}")
    def get_cell(cell_id: str):
        return session.cell_payload(cell_id)

    @app.post("/v1/cells/{cell_id}/stretch")
    async def stretch(cell_id: str, request: Request):
        body = await request.json()
        handle = field(body, "handle", str)
        dx = field(body, "dx", (int,), required=False, default=0)
        dy = field(body, "dy", (int,), required=False, default=0)
        with lock:
            session.stretch_cell(cell_id, handle, dx, dy)
            return session.cell_payload(cell_id)

    @app.post("/v1/design/place")
    async def place(request: Request):
        body = await request.json()
        cell_id = field(body, "cell_id", str)
        x = field(body, "x", (int,))
        y = field(body, "y", (int,))
        nets = field(body, "nets", dict, required=False, default={})
        with lock:
            instance_id = session.place(cell_id, x, y, nets)
            return session.instance_payload(instance_id)

    @app.post("/v1/design/move")
    async def move(request: Request):
        body = await request.json()
        instance_id = field(body, "instance_id", str)
        with lock:
            session.move(instance_id, field(body, "x", (int,)), field(body, "y", (int,)))
            return session.instance_payload(instance_id)

    @app.get("/v1/design")
    def design():
        return {"instances": [session.instance_payload(i.instance_id)
                              for i in session.design]}

    @app.post("/v1/design/abut")
    async def abut(request: Request):
        body = await request.json()
        a = field(body, "a", str)
        b = field(body, "b", str)
        with lock:
            case = session.abut(a, b)
            return {"case": case.name,
                    "pin_degree": case.pin_degree,
                    "a": session.instance_payload(a),
                    "b": session.instance_payload(b)}

    @app.post("/v1/design/unabut")
    async def unabut(request: Request):
        body = await request.json()
        a = field(body, "a", str)
        b = field(body, "b", str)
        with lock:
            session.unabut(a, b)
            return {"a": session.instance_payload(a), "b": session.instance_payload(b)}

    @app.post("/v1/schematic")
    async def schematic(request: Request):
        body = await request.json()
        text = field(body, "text", str)
        with lock:
            nl = session.set_schematic(text)
            return {"devices": len(nl.devices), "nets": sorted(nl.nets)}

    @app.get("/v1/design/drc")
    def drc():
        return [{"rule": {"kind": v.rule.kind, "layers": list(v.rule.layers),
                          "value": v.rule.value},
                 "shapes": list(v.shapes), "measured": v.measured,
                 "location": [v.location.x, v.location.y]}
                for v in session.drc()]

    @app.get("/v1/design/flylines")
    def flylines():
        return [{"net": f.net, "from": [f.start.x, f.start.y],
                 "to": [f.end.x, f.end.y]} for f in session.flylines()]

    @app.get("/v1/design/gds")
    def gds():
        return Response(content=session.gds_bytes(),
                        media_type="application/octet-stream",
                        headers={"Content-Disposition": "attachment; filename=design.gds"})

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="studio")
    return app


def serve(tech, port: int = 8472, host: str = "127.0.0.1",
          static_dir: str | None = None) -> None:
    import uvicorn

    app = create_app(Session(tech), static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
