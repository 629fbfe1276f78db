import { describe, expect, it } from "vitest";

import { WorkbenchClient } from "../src/api.js";
import { Studio } from "../src/controller.js";
import { HandleDrag } from "../src/handles.js";
import { renderScene, sceneCoordinates } from "../src/scene.js";
import { FakeApi, abutResponse, instance, mosCell, widthHandle } from "./fixtures.js";

function studioWith(api: FakeApi): Studio {
  return new Studio(new WorkbenchClient("", api.fetch));
}

describe("width handle drag-release", () => {
  it("issues exactly one /stretch call and re-renders from the response", async () => {
    const api = new FakeApi();
    api.on("POST", "/v1/cells", () => mosCell());
    const stretched = mosCell(6200);
    api.on("POST", "/v1/cells/c1/stretch", body => {
      expect(body).toEqual({ handle: "width_handle_left", dx: -1200, dy: 0 });
      return stretched;
    });

    const studio = studioWith(api);
    await studio.generate("pmos20t", { fingers: 1, w: 5000 });

    const drag = new HandleDrag(studio.state.cell!.handles[0]);
    drag.start(0, 1400);
    drag.move(-500, 1400);
    drag.move(-900, 1500);
    await studio.releaseHandle(drag.release(-1200, 1450));

    expect(api.callsTo("POST", "/v1/cells/c1/stretch")).toHaveLength(1);
    expect(studio.state.cell).toEqual(stretched);
    expect(studio.state.status).toContain("wtot 6.200");
    // the scene now shows exactly the response geometry
    const coords = sceneCoordinates(renderScene({ ...studio.state }));
    expect(coords.length).toBeGreaterThan(0);
  });

  it("a drag orthogonal to the handle direction issues no call", async () => {
    const api = new FakeApi();
    api.on("POST", "/v1/cells", () => mosCell());
    const studio = studioWith(api);
    await studio.generate("pmos20t");

    const drag = new HandleDrag(studio.state.cell!.handles[0]);
    drag.start(0, 1400);
    await studio.releaseHandle(drag.release(0, 9000));

    expect(api.callsTo("POST", "/v1/cells/c1/stretch")).toHaveLength(0);
    expect(studio.state.cell!.params!.wtot).toBe(5000);
  });

  it("a drag past the minimum shows the readout pinned at 0.4", async () => {
    const api = new FakeApi();
    api.on("POST", "/v1/cells", () => mosCell());
    api.on("POST", "/v1/cells/c1/stretch", () => mosCell(400));
    const studio = studioWith(api);
    await studio.generate("pmos20t");

    const drag = new HandleDrag(studio.state.cell!.handles[0]);
    drag.start(0, 1400);
    await studio.releaseHandle(drag.release(10_000_000, 1400));

    expect(studio.state.cell!.params!.wtot).toBe(400);
    expect(studio.state.status).toContain("wtot 0.400");
  });
});

describe("instance drag to abut", () => {
  function placedPair(api: FakeApi): Studio {
    const studio = studioWith(api);
    studio.state.instances = [instance("i1", 0), instance("i2", 60000)];
    return studio;
  }

  it("drop within overlap triggers /abut and shows the merged pair", async () => {
    const api = new FakeApi();
    const mergedA = instance("i1", 0, 5000, "i2");
    const mergedB = instance("i2", 7600, 5000, "i1");
    api.on("POST", "/v1/design/move", body => instance("i2", body.x));
    api.on("POST", "/v1/design/abut", body => {
      expect(body).toEqual({ a: "i2", b: "i1" });
      return abutResponse("Abut2PinEqual", mergedB, mergedA);
    });

    const studio = placedPair(api);
    await studio.releaseInstance({ instanceId: "i2", x: 9000, y: 0 });

    expect(api.callsTo("POST", "/v1/design/abut")).toHaveLength(1);
    expect(studio.state.status).toBe("Abut2PinEqual");
    const byId = Object.fromEntries(studio.state.instances.map(i => [i.instance_id, i]));
    expect(byId.i1.abutted_with).toBe("i2");
    expect(byId.i2.abutted_with).toBe("i1");
    // merged geometry rendered from the response payloads
    const coords = new Set(sceneCoordinates(renderScene({
      cell: null, instances: studio.state.instances, violations: [], flylines: [],
    })));
    expect(coords).toContain(7600 - 1200);
  });

  it("drop at a 0.5 um gap shows NoAbut and leaves payloads alone", async () => {
    const api = new FakeApi();
    const movedB = instance("i2", 9900);
    api.on("POST", "/v1/design/move", () => movedB);
    api.on("POST", "/v1/design/abut", () =>
      abutResponse("NoAbut", movedB, instance("i1", 0)));

    const studio = placedPair(api);
    await studio.releaseInstance({ instanceId: "i2", x: 9900, y: 0 });

    expect(studio.state.status).toBe("NoAbut");
    const byId = Object.fromEntries(studio.state.instances.map(i => [i.instance_id, i]));
    expect(byId.i2.abutted_with).toBeNull();
    expect(byId.i2.x).toBe(9900);
  });

  it("moving an abutted instance away unabuts first and restores originals", async () => {
    const api = new FakeApi();
    const restoredA = instance("i1", 0);
    const restoredB = instance("i2", 7600);
    api.on("POST", "/v1/design/unabut", body => {
      expect(body).toEqual({ a: "i2", b: "i1" });
      return { a: restoredB, b: restoredA };
    });
    api.on("POST", "/v1/design/move", body => instance("i2", body.x));
    api.on("POST", "/v1/design/abut", body =>
      abutResponse("NoAbut", instance("i2", 90000), restoredA));

    const studio = studioWith(api);
    studio.state.instances = [instance("i1", 0, 5000, "i2"),
                              instance("i2", 7600, 5000, "i1")];
    await studio.releaseInstance({ instanceId: "i2", x: 90000, y: 0 });

    expect(api.callsTo("POST", "/v1/design/unabut")).toHaveLength(1);
    const order = api.calls.map(c => c.path);
    expect(order.indexOf("/v1/design/unabut")).toBeLessThan(
      order.indexOf("/v1/design/move"));
    const byId = Object.fromEntries(studio.state.instances.map(i => [i.instance_id, i]));
    expect(byId.i1.abutted_with).toBeNull();
    expect(byId.i1.x).toBe(0);
  });
});

describe("overlays", () => {
  it("refreshes violations and flylines from the service", async () => {
    const api = new FakeApi();
    api.on("GET", "/v1/design/drc", () => [
      { rule: { kind: "min_width", layers: ["met1"], value: 500 },
        shapes: ["i1/0"], measured: 400, location: [10, 20] },
    ]);
    api.on("GET", "/v1/design/flylines", () => [
      { net: "s1", from: [0, 0], to: [100, 100] },
    ]);
    const studio = studioWith(api);
    await studio.refreshOverlays();
    expect(studio.state.violations).toHaveLength(1);
    expect(studio.state.flylines).toHaveLength(1);
    expect(studio.state.status).toContain("1 DRC violation");
  });
});
