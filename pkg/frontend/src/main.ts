/**
 * Annotation single-page app.
 *
 * Workflow: phase 1 labels the structural (256px) layers' clusters as
 * text/background; phase 2 labels candidate semantic layers (64/128px) as
 * printed/handwritten/background, with a per-layer semantic/ignored toggle.
 * Keyboard: 1/2/3 pick the current role's classes, 0 is background; every
 * assignment auto-advances to the next cluster.
 */

import {
  ApiError,
  getCatalog,
  getLayers,
  overlayUrl,
  postCatalog,
} from "./api.js";
import {
  CLASS_COLORS,
  ClusterClass,
  LayerInfo,
  UiState,
  allowedClasses,
  applyCatalog,
  assignAndAdvance,
  classForKey,
  initialState,
  layerById,
  missingAssignments,
  toCatalogPayload,
  toggleRole,
  validateDrafts,
} from "./state.js";

let state: UiState | null = null;

const $ = (id: string) => document.getElementById(id)!;

function setBanner(message: string, retry = false): void {
  const banner = $("banner");
  banner.textContent = message;
  banner.style.display = message ? "block" : "none";
  if (retry) {
    const button = document.createElement("button");
    button.textContent = "Retry";
    button.onclick = () => void boot();
    banner.append(" ", button);
  }
}

async function boot(): Promise<void> {
  setBanner("");
  try {
    const { layers, patch_count } = await getLayers();
    state = initialState(layers, patch_count);
    const saved = await getCatalog();
    if (saved) state = applyCatalog(state, saved);
  } catch (err) {
    setBanner(`Server unreachable (${String(err)})`, true);
    return;
  }
  render();
}

function select(layerId: number, clusterId = 0): void {
  if (!state) return;
  state = { ...state, selectedLayer: layerId, selectedCluster: clusterId };
  render();
}

function assign(cls: ClusterClass): void {
  if (!state) return;
  state = assignAndAdvance(state, cls);
  render();
}

function movePatch(delta: number): void {
  if (!state || state.patchCount === 0) return;
  const patchIndex =
    (state.patchIndex + delta + state.patchCount) % state.patchCount;
  state = { ...state, patchIndex };
  render();
}

async function save(): Promise<void> {
  if (!state) return;
  const missing = missingAssignments(state);
  if (missing.total > 0) {
    setBanner(`Cannot save: ${missing.total} cluster(s) still unassigned.`);
    render();
    return;
  }
  const problems = validateDrafts(state);
  if (problems.length > 0) {
    setBanner(`Cannot save: ${problems.join("; ")}`);
    render();
    return;
  }
  try {
    await postCatalog(toCatalogPayload(state));
    state = { ...state, dirty: false };
    setBanner("Catalog saved.");
  } catch (err) {
    if (err instanceof ApiError && err.problems.length) {
      setBanner(`Server rejected the catalog: ${err.problems.join("; ")}`);
    } else {
      setBanner(`Save failed: ${String(err)}`, true);
    }
  }
  render();
}

function phaseOf(layer: LayerInfo): string {
  return layer.size >= 256 ? "phase 1 · structural" : "phase 2 · semantic";
}

function renderLayerList(): void {
  if (!state) return;
  const list = $("layers");
  list.innerHTML = "";
  const missing = missingAssignments(state);
  for (const layer of state.layers) {
    const item = document.createElement("li");
    item.className = layer.layer_id === state.selectedLayer ? "selected" : "";
    const open = document.createElement("a");
    open.href = "#";
    open.textContent = `layer ${layer.layer_id} · ${layer.size}px · ${layer.role}`;
    open.onclick = (e) => {
      e.preventDefault();
      if (layer.role !== "ignored") select(layer.layer_id);
    };
    item.append(open);
    const left = missing.byLayer.get(layer.layer_id);
    if (left) {
      const badge = document.createElement("span");
      badge.className = "badge";
      badge.textContent = `${left} left`;
      item.append(badge);
    }
    if (layer.size < 256) {
      const toggle = document.createElement("button");
      toggle.textContent = layer.role === "semantic" ? "ignore" : "mark semantic";
      toggle.onclick = () => {
        state = toggleRole(state!, layer.layer_id);
        render();
      };
      item.append(toggle);
    }
    list.append(item);
  }
}

function renderClusters(): void {
  if (!state || state.selectedLayer === null) return;
  const layer = layerById(state, state.selectedLayer);
  const drafts = state.drafts.get(layer.layer_id)!;
  $("phase").textContent = phaseOf(layer);
  const grid = $("clusters");
  grid.innerHTML = "";
  for (let cid = 0; cid < layer.k; cid++) {
    const card = document.createElement("div");
    card.className = "cluster" + (cid === state.selectedCluster ? " selected" : "");
    const img = document.createElement("img");
    img.src = overlayUrl(layer.layer_id, cid, state.patchIndex);
    img.alt = `cluster ${cid} overlay`;
    card.append(img);
    const caption = document.createElement("div");
    const cls = drafts.get(cid);
    caption.textContent = `#${cid} ${cls ?? "unassigned"}`;
    caption.style.color = cls ? CLASS_COLORS[cls] : "#b00";
    card.append(caption);
    card.onclick = () => select(layer.layer_id, cid);
    grid.append(card);
  }

  const buttons = $("classes");
  buttons.innerHTML = "";
  allowedClasses(layer.role).forEach((cls, i) => {
    const button = document.createElement("button");
    const key = cls === "background" ? "0" : String(i + 1);
    button.textContent = `${cls} [${key}]`;
    button.style.borderColor = CLASS_COLORS[cls];
    button.onclick = () => assign(cls);
    buttons.append(button);
  });
}

function renderStatus(): void {
  if (!state) return;
  const missing = missingAssignments(state);
  const assignable = state.layers
    .filter((l) => l.role !== "ignored")
    .reduce((sum, l) => sum + l.k, 0);
  const done = assignable - missing.total;
  $("progress").textContent =
    `${done}/${assignable} clusters assigned` + (state.dirty ? " · unsaved changes" : "");
  ($("save") as HTMLButtonElement).disabled = missing.total > 0;
  $("patchinfo").textContent = `patch ${state.patchIndex + 1}/${state.patchCount}`;
}

function render(): void {
  renderLayerList();
  renderClusters();
  renderStatus();
}

document.addEventListener("keydown", (event) => {
  if (!state || state.selectedLayer === null) return;
  if (event.target instanceof HTMLInputElement) return;
  const layer = layerById(state, state.selectedLayer);
  const cls = classForKey(layer.role, event.key);
  if (cls) {
    assign(cls);
    event.preventDefault();
  } else if (event.key === "ArrowRight") {
    movePatch(1);
  } else if (event.key === "ArrowLeft") {
    movePatch(-1);
  }
});

window.addEventListener("DOMContentLoaded", () => {
  $("save").onclick = () => void save();
  $("prev").onclick = () => movePatch(-1);
  $("next").onclick = () => movePatch(1);
  void boot();
});
