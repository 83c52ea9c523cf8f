/**
 * Bootstrap: wires the API client, controller, view, and URL-fragment
 * history together. The fragment is the single source of truth for view
 * state, so reload and back/forward restore the exact same requests.
 */

import { ApiClient, ApiError } from "./api.js";
import { parseCmap, type ConfidenceGrid } from "./cmap.js";
import { Controller, type ControllerEvents } from "./controller.js";
import {
  DEFAULT_STATE,
  parseState,
  serializeState,
  type ConfidenceSource,
  type ViewState,
} from "./state.js";
import { View } from "./view.js";

const api = new ApiClient("");
const view = new View();

let lastFragment = "";
let applyingHistory = false;

// Discrete changes get history entries; slider drags only replace, so
// back/forward steps between meaningful views instead of drag samples.
const PUSH_KEYS: ReadonlyArray<keyof ViewState> = [
  "session",
  "mode",
  "confSource",
  "overlay",
  "layout",
  "pin",
];
let lastState: ViewState = DEFAULT_STATE;

function syncUrl(state: ViewState): void {
  const fragment = serializeState(state);
  if (fragment === lastFragment || applyingHistory) {
    lastState = state;
    return;
  }
  const push = PUSH_KEYS.some(
    (key) => JSON.stringify(state[key]) !== JSON.stringify(lastState[key]),
  );
  if (push) {
    history.pushState(null, "", `#${fragment}`);
  } else {
    history.replaceState(null, "", `#${fragment}`);
  }
  lastFragment = fragment;
  lastState = state;
}

const events: ControllerEvents = {
  onState(state) {
    view.onState(state);
    syncUrl(state);
  },
  onFused(result) {
    view.onFused(result);
  },
  onOverlay(result) {
    view.onOverlay(result);
  },
  onPin(result) {
    view.onPin(result);
  },
  onTrace(points) {
    view.onTrace(points);
  },
  onError(message, retry) {
    view.onError(message, retry);
  },
};

const controller = new Controller(api, parseState(location.hash), events);

const cmapCache = new Map<string, ConfidenceGrid>();
async function getCmap(source: ConfidenceSource): Promise<ConfidenceGrid> {
  const key = `${controller.state().session}:${source}`;
  const cached = cmapCache.get(key);
  if (cached) return cached;
  const text = await api.fetchCmapText(controller.state().session, source);
  const grid = parseCmap(text);
  cmapCache.set(key, grid);
  return grid;
}

view.bind(controller, getCmap);

function setupForm(): void {
  const form = document.getElementById("setup-form") as HTMLFormElement;
  const errorEl = document.getElementById("setup-error") as HTMLParagraphElement;
  const file = (id: string): File | undefined =>
    (document.getElementById(id) as HTMLInputElement).files?.[0] ?? undefined;
  const text = (id: string): string =>
    (document.getElementById(id) as HTMLInputElement | HTMLSelectElement).value.trim();

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    errorEl.hidden = true;
    const noisy = file("f-noisy");
    if (!noisy) return;

    const config: Record<string, unknown> = {
      reliable: text("f-reliable"),
      wavelet: text("f-wavelet"),
      threshold: Number(text("f-threshold")),
      schedule: text("f-schedule"),
    };
    if (!file("f-deep") && text("f-deep-desc") !== "") config.deep = text("f-deep-desc");
    if (text("f-levels") !== "") config.levels = Number(text("f-levels"));

    api
      .createSession({
        noisy,
        truth: file("f-truth"),
        deep: file("f-deep"),
        cmap: file("f-cmap"),
        config,
      })
      .then(async (info) => {
        controller.setSession(info);
        view.showWorkbench(info);
        await controller.refresh();
      })
      .catch((error: unknown) => {
        errorEl.textContent = error instanceof ApiError ? error.message : String(error);
        errorEl.hidden = false;
      });
  });
}

async function restoreFromUrl(): Promise<void> {
  const state = parseState(location.hash);
  if (state.session === "") return;
  try {
    const info = await api.sessionInfo(state.session);
    controller.setSession(info, state);
    view.showWorkbench(info);
  } catch (error) {
    if (error instanceof ApiError && error.status === 404) {
      const errorEl = document.getElementById("setup-error") as HTMLParagraphElement;
      errorEl.textContent = `session ${state.session} is gone (evicted or never existed); create a new one`;
      errorEl.hidden = false;
      history.replaceState(null, "", "#");
      return;
    }
    throw error;
  }
}

window.addEventListener("hashchange", () => {
  const fragment = location.hash.startsWith("#") ? location.hash.slice(1) : location.hash;
  if (fragment === lastFragment) return;
  applyingHistory = true;
  try {
    const state = parseState(location.hash);
    lastFragment = fragment;
    lastState = state;
    if (state.session !== controller.state().session) {
      void restoreFromUrl();
    } else {
      controller.applyState(state);
    }
  } finally {
    applyingHistory = false;
  }
});

setupForm();
void restoreFromUrl();
