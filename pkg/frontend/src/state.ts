/**
 * Pure annotation-session state: layers, per-cluster class drafts, and the
 * client-side mirror of the server's catalog validation rules.  Everything
 * here is DOM-free so it can be unit tested directly.
 */

export type LayerRole = "structural" | "semantic" | "ignored";
export type ClusterClass = "background" | "printed" | "handwritten" | "text";

export interface LayerInfo {
  layer_id: number;
  size: number;
  k: number;
  role: LayerRole;
}

export interface CatalogLayer {
  layer_id: number;
  size: number;
  role: LayerRole;
  clusters: { id: number; class: ClusterClass }[];
}

export interface CatalogPayload {
  layers: CatalogLayer[];
}

export interface UiState {
  layers: LayerInfo[];
  /** drafts[layerId][clusterId] = chosen class */
  drafts: Map<number, Map<number, ClusterClass>>;
  selectedLayer: number | null;
  selectedCluster: number;
  patchIndex: number;
  patchCount: number;
  dirty: boolean;
}

export const STRUCTURAL_CLASSES: ClusterClass[] = ["background", "text"];
export const SEMANTIC_CLASSES: ClusterClass[] = ["background", "printed", "handwritten"];

/** Fig-style palette: printed orange, handwritten blue. */
export const CLASS_COLORS: Record<ClusterClass, string> = {
  background: "#555555",
  printed: "#ff8c00",
  handwritten: "#1e5aff",
  text: "#2da44e",
};

export function allowedClasses(role: LayerRole): ClusterClass[] {
  if (role === "structural") return STRUCTURAL_CLASSES;
  if (role === "semantic") return SEMANTIC_CLASSES;
  return [];
}

export function initialState(layers: LayerInfo[], patchCount: number): UiState {
  const first = layers.find((l) => l.role !== "ignored");
  return {
    layers,
    drafts: new Map(layers.map((l) => [l.layer_id, new Map()])),
    selectedLayer: first ? first.layer_id : null,
    selectedCluster: 0,
    patchIndex: 0,
    patchCount,
    dirty: false,
  };
}

export function layerById(state: UiState, layerId: number): LayerInfo {
  const layer = state.layers.find((l) => l.layer_id === layerId);
  if (!layer) throw new Error(`unknown layer ${layerId}`);
  return layer;
}

/** Assign a class to the selected cluster and advance to the next one. */
export function assignAndAdvance(state: UiState, cls: ClusterClass): UiState {
  if (state.selectedLayer === null) return state;
  const layer = layerById(state, state.selectedLayer);
  if (!allowedClasses(layer.role).includes(cls)) return state;
  const drafts = cloneDrafts(state.drafts);
  drafts.get(layer.layer_id)!.set(state.selectedCluster, cls);
  const next = Math.min(state.selectedCluster + 1, layer.k - 1);
  return { ...state, drafts, selectedCluster: next, dirty: true };
}

/** Keyboard contract: 1/2/3 are the role's classes in order, 0 is background. */
export function classForKey(role: LayerRole, key: string): ClusterClass | null {
  const classes = allowedClasses(role);
  if (key === "0") return classes.length ? "background" : null;
  const index = Number.parseInt(key, 10) - 1;
  if (Number.isNaN(index) || index < 0 || index >= classes.length) return null;
  return classes[index];
}

/** Toggle a candidate semantic layer between semantic and ignored. */
export function toggleRole(state: UiState, layerId: number): UiState {
  const layers = state.layers.map((l) => {
    if (l.layer_id !== layerId) return l;
    if (l.role === "semantic") return { ...l, role: "ignored" as LayerRole };
    if (l.role === "ignored" && l.size < 256) return { ...l, role: "semantic" as LayerRole };
    return l;
  });
  const drafts = cloneDrafts(state.drafts);
  const toggled = layers.find((l) => l.layer_id === layerId)!;
  if (toggled.role === "ignored") drafts.get(layerId)!.clear();
  return { ...state, layers, drafts, dirty: true };
}

export interface MissingReport {
  total: number;
  byLayer: Map<number, number>;
}

export function missingAssignments(state: UiState): MissingReport {
  const byLayer = new Map<number, number>();
  let total = 0;
  for (const layer of state.layers) {
    if (layer.role === "ignored") continue;
    const drafts = state.drafts.get(layer.layer_id) ?? new Map();
    let missing = 0;
    for (let cid = 0; cid < layer.k; cid++) {
      if (!drafts.has(cid)) missing++;
    }
    if (missing > 0) byLayer.set(layer.layer_id, missing);
    total += missing;
  }
  return { total, byLayer };
}

/**
 * Client-side mirror of the server's validator; saving is blocked while this
 * returns problems, so the UI can only produce acceptable catalogs.
 */
export function validateDrafts(state: UiState): string[] {
  const problems: string[] = [];
  for (const layer of state.layers) {
    if (layer.role === "ignored") continue;
    const allowed = allowedClasses(layer.role);
    const drafts = state.drafts.get(layer.layer_id) ?? new Map<number, ClusterClass>();
    for (let cid = 0; cid < layer.k; cid++) {
      if (!drafts.has(cid)) {
        problems.push(`layer ${layer.layer_id}: cluster ${cid} has no class assignment`);
      }
    }
    for (const [cid, cls] of drafts) {
      if (cid < 0 || cid >= layer.k) {
        problems.push(`layer ${layer.layer_id}: cluster id ${cid} out of range for k=${layer.k}`);
      } else if (!allowed.includes(cls)) {
        problems.push(`layer ${layer.layer_id}: class '${cls}' not allowed for ${layer.role} layer`);
      }
    }
  }
  if (!state.layers.some((l) => l.role === "structural")) {
    problems.push("catalog has no structural layer");
  }
  if (!state.layers.some((l) => l.role === "semantic")) {
    problems.push("catalog has no semantic layer");
  }
  return problems;
}

export function toCatalogPayload(state: UiState): CatalogPayload {
  const layers = [...state.layers]
    .sort((a, b) => a.layer_id - b.layer_id)
    .map((layer) => {
      const drafts = state.drafts.get(layer.layer_id) ?? new Map<number, ClusterClass>();
      const ids = [...drafts.keys()].sort((a, b) => a - b);
      return {
        layer_id: layer.layer_id,
        size: layer.size,
        role: layer.role,
        clusters: layer.role === "ignored" ? [] : ids.map((id) => ({ id, class: drafts.get(id)! })),
      };
    });
  return { layers };
}

/** Load a saved catalog back into drafts (round-trip: no edits, same payload). */
export function applyCatalog(state: UiState, payload: CatalogPayload): UiState {
  const layers = state.layers.map((l) => {
    const saved = payload.layers.find((p) => p.layer_id === l.layer_id);
    return saved ? { ...l, role: saved.role } : l;
  });
  const drafts = new Map(layers.map((l) => [l.layer_id, new Map<number, ClusterClass>()]));
  for (const saved of payload.layers) {
    const target = drafts.get(saved.layer_id);
    if (!target) continue;
    for (const { id, class: cls } of saved.clusters) target.set(id, cls);
  }
  return { ...state, layers, drafts, dirty: false };
}

function cloneDrafts(drafts: UiState["drafts"]): UiState["drafts"] {
  return new Map([...drafts].map(([lid, m]) => [lid, new Map(m)]));
}
