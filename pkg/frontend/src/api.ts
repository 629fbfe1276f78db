import type {
  AbutResponse,
  CellPayload,
  FlylinePayload,
  InstancePayload,
  LayerInfo,
  ViolationPayload,
} from "./types.js";

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

/** Thin typed client for the workbench /v1 API. */
export class WorkbenchClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchFn(this.baseUrl + path, init);
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const doc = await resp.json();
        if (doc && doc.error) detail = doc.error;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  layers(): Promise<LayerInfo[]> {
    return this.request("GET", "/v1/tech/layers");
  }

  createCell(device: string, params: Record<string, number | string> = {}): Promise<CellPayload> {
    return this.request("POST", "/v1/cells", { device, params });
  }

  stretch(cellId: string, handle: string, dx: number, dy: number): Promise<CellPayload> {
    return this.request("POST", `/v1/cells/${cellId}/stretch`, { handle, dx, dy });
  }

  place(cellId: string, x: number, y: number,
        nets: Record<string, string> = {}): Promise<InstancePayload> {
    return this.request("POST", "/v1/design/place", { cell_id: cellId, x, y, nets });
  }

  move(instanceId: string, x: number, y: number): Promise<InstancePayload> {
    return this.request("POST", "/v1/design/move", { instance_id: instanceId, x, y });
  }

  abut(a: string, b: string): Promise<AbutResponse> {
    return this.request("POST", "/v1/design/abut", { a, b });
  }

  unabut(a: string, b: string): Promise<{ a: InstancePayload; b: InstancePayload }> {
    return this.request("POST", "/v1/design/unabut", { a, b });
  }

  loadSchematic(text: string): Promise<{ devices: number; nets: string[] }> {
    return this.request("POST", "/v1/schematic", { text });
  }

  drc(): Promise<ViolationPayload[]> {
    return this.request("GET", "/v1/design/drc");
  }

  flylines(): Promise<FlylinePayload[]> {
    return this.request("GET", "/v1/design/flylines");
  }

  gdsUrl(): string {
    return this.baseUrl + "/v1/design/gds";
  }
}
