/**
 * View state and its URL-fragment serialization.
 *
 * Every state is total (no optional request knobs), so one state maps to
 * exactly one fused-image request tuple and the fragment round-trips
 * losslessly: parse(serialize(s)) deep-equals s for any valid s.
 */

export type Mode = "dct" | "dwt" | "dwt-conf";
export type Schedule = "uniform" | "low_first";
export type ConfidenceSource = "none" | "oracle" | "model" | "external";
export type PaneLayout = "side-by-side" | "wipe";

export const MODES: readonly Mode[] = ["dct", "dwt", "dwt-conf"];
export const SCHEDULES: readonly Schedule[] = ["uniform", "low_first"];
export const SOURCES: readonly ConfidenceSource[] = ["none", "oracle", "model", "external"];
export const LAYOUTS: readonly PaneLayout[] = ["side-by-side", "wipe"];

/** Normalized [0,1] rectangle selected for nearest-neighbor zoom. */
export interface ZoomRect {
  x: number;
  y: number;
  w: number;
  h: number;
}

/** Snapshot A of the what-if compare: the pinned request knobs. */
export interface PinTuple {
  mode: Mode;
  w: number;
  conf: ConfidenceSource;
}

export interface ViewState {
  session: string;
  w: number;
  mode: Mode;
  schedule: Schedule;
  confSource: ConfidenceSource;
  overlay: boolean;
  threshold: number;
  opacity: number;
  layout: PaneLayout;
  zoom: ZoomRect | null;
  pin: PinTuple | null;
  wipe: number;
}

export const DEFAULT_STATE: ViewState = {
  session: "",
  w: 0.5,
  mode: "dct",
  schedule: "low_first",
  confSource: "none",
  overlay: false,
  threshold: 0.95,
  opacity: 0.6,
  layout: "side-by-side",
  zoom: null,
  pin: null,
  wipe: 0.5,
};

/** Snap to the slider's 0.01 step and clamp to [0,1]. */
export function clampWeight(value: number): number {
  if (!Number.isFinite(value)) return DEFAULT_STATE.w;
  const stepped = Math.round(value * 100) / 100;
  return Math.min(1, Math.max(0, stepped));
}

export function clampUnit(value: number, fallback: number): number {
  if (!Number.isFinite(value)) return fallback;
  return Math.min(1, Math.max(0, value));
}

/** Overlay threshold must stay strictly inside (0,1) for the service. */
export function clampThreshold(value: number): number {
  if (!Number.isFinite(value)) return DEFAULT_STATE.threshold;
  return Math.min(0.99, Math.max(0.01, value));
}

/** The parameters of one GET /sessions/{id}/fused request. */
export interface RequestTuple {
  session: string;
  mode: Mode;
  w: number;
  conf: ConfidenceSource;
}

/**
 * Canonical request tuple for a state. Modes other than dwt-conf ignore
 * the confidence source, so it is normalized to "none"; equal views then
 * produce byte-equal request URLs.
 */
export function requestTuple(state: ViewState): RequestTuple {
  return {
    session: state.session,
    mode: state.mode,
    w: state.w,
    conf: state.mode === "dwt-conf" ? state.confSource : "none",
  };
}

export function pinTuple(state: ViewState): PinTuple {
  const tuple = requestTuple(state);
  return { mode: tuple.mode, w: tuple.w, conf: tuple.conf };
}

export function paneLabel(w: number): string {
  if (w === 0) return "reliable (w=0)";
  if (w === 1) return "deep (w=1)";
  return `fused (w=${w})`;
}

function round4(value: number): number {
  return Math.round(value * 10000) / 10000;
}

export function serializeState(state: ViewState): string {
  const params = new URLSearchParams();
  params.set("session", state.session);
  params.set("w", String(state.w));
  params.set("mode", state.mode);
  params.set("schedule", state.schedule);
  params.set("conf", state.confSource);
  params.set("overlay", state.overlay ? "1" : "0");
  params.set("threshold", String(state.threshold));
  params.set("opacity", String(state.opacity));
  params.set("layout", state.layout);
  params.set("wipe", String(state.wipe));
  if (state.zoom !== null) {
    const z = state.zoom;
    params.set("zoom", [z.x, z.y, z.w, z.h].map((v) => String(round4(v))).join(","));
  }
  if (state.pin !== null) {
    params.set("pin", `${state.pin.mode},${state.pin.w},${state.pin.conf}`);
  }
  return params.toString();
}

function pick<T extends string>(value: string | null, allowed: readonly T[], fallback: T): T {
  return allowed.includes(value as T) ? (value as T) : fallback;
}

function parseZoom(text: string | null): ZoomRect | null {
  if (text === null) return null;
  const parts = text.split(",").map(Number);
  if (parts.length !== 4 || parts.some((v) => !Number.isFinite(v))) return null;
  const [x, y, w, h] = parts as [number, number, number, number];
  if (x < 0 || y < 0 || w <= 0 || h <= 0 || x + w > 1 || y + h > 1) return null;
  return { x: round4(x), y: round4(y), w: round4(w), h: round4(h) };
}

function parsePin(text: string | null): PinTuple | null {
  if (text === null) return null;
  const parts = text.split(",");
  if (parts.length !== 3) return null;
  const [mode, wText, conf] = parts as [string, string, string];
  if (!MODES.includes(mode as Mode) || !SOURCES.includes(conf as ConfidenceSource)) return null;
  const w = Number(wText);
  if (!Number.isFinite(w)) return null;
  return { mode: mode as Mode, w: clampWeight(w), conf: conf as ConfidenceSource };
}

/** Parse a location.hash value (leading "#" optional). Invalid fields fall back to defaults. */
export function parseState(fragment: string): ViewState {
  const text = fragment.startsWith("#") ? fragment.slice(1) : fragment;
  const params = new URLSearchParams(text);
  const num = (key: string): number => Number(params.get(key) ?? NaN);
  return {
    session: params.get("session") ?? "",
    w: clampWeight(num("w")),
    mode: pick(params.get("mode"), MODES, DEFAULT_STATE.mode),
    schedule: pick(params.get("schedule"), SCHEDULES, DEFAULT_STATE.schedule),
    confSource: pick(params.get("conf"), SOURCES, DEFAULT_STATE.confSource),
    overlay: params.get("overlay") === "1",
    threshold: clampThreshold(num("threshold")),
    opacity: clampUnit(num("opacity"), DEFAULT_STATE.opacity),
    layout: pick(params.get("layout"), LAYOUTS, DEFAULT_STATE.layout),
    zoom: parseZoom(params.get("zoom")),
    pin: parsePin(params.get("pin")),
    wipe: clampUnit(num("wipe"), DEFAULT_STATE.wipe),
  };
}
