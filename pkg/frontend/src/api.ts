/** Thin wrappers over the annotation server's HTTP API. */

import type { CatalogPayload, LayerInfo } from "./state.js";

export interface LayersResponse {
  patch_count: number;
  layers: LayerInfo[];
}

export interface ClusterInfo {
  id: number;
  pixel_count: number;
}

export class ApiError extends Error {
  constructor(
    message: string,
    public status: number,
    public problems: string[] = [],
  ) {
    super(message);
  }
}

async function checkOk(response: Response): Promise<Response> {
  if (response.ok) return response;
  let problems: string[] = [];
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (body?.detail?.problems) problems = body.detail.problems;
    if (typeof body?.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(`${response.status}: ${detail}`, response.status, problems);
}

export async function getLayers(base = ""): Promise<LayersResponse> {
  const r = await checkOk(await fetch(`${base}/api/layers`));
  return r.json();
}

export async function getClusters(layerId: number, base = ""): Promise<ClusterInfo[]> {
  const r = await checkOk(await fetch(`${base}/api/layers/${layerId}/clusters`));
  return (await r.json()).clusters;
}

export async function getCatalog(base = ""): Promise<CatalogPayload | null> {
  const response = await fetch(`${base}/api/catalog`);
  if (response.status === 404) return null;
  return (await checkOk(response)).json();
}

export async function postCatalog(payload: CatalogPayload, base = ""): Promise<void> {
  await checkOk(
    await fetch(`${base}/api/catalog`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    }),
  );
}

export function overlayUrl(layerId: number, clusterId: number, patch: number, base = ""): string {
  return `${base}/api/layers/${layerId}/clusters/${clusterId}/overlay?patch=${patch}`;
}

export function patchUrl(patch: number, base = ""): string {
  return `${base}/api/patches/${patch}`;
}
