/**
 * Orchestrates state changes into service requests. The view layer only
 * renders what the callbacks hand it; all request discipline (debounce,
 * cancellation, latest-wins) lives here so it can be tested headlessly.
 */

import type { ApiClient, FusedImage, SessionInfo } from "./api.js";
import { debounce, type Debounced } from "./debounce.js";
import { LatestWins } from "./requests.js";
import { SweepTrace, type TracePoint } from "./sparkline.js";
import {
  clampThreshold,
  clampUnit,
  clampWeight,
  paneLabel,
  pinTuple,
  requestTuple,
  type ConfidenceSource,
  type Mode,
  type PaneLayout,
  type PinTuple,
  type RequestTuple,
  type Schedule,
  type ViewState,
  type ZoomRect,
} from "./state.js";

export interface FusedView {
  image: FusedImage;
  tuple: RequestTuple;
  label: string;
}

export interface OverlayView {
  bytes: ArrayBuffer;
  source: ConfidenceSource;
  threshold: number;
}

export interface ControllerEvents {
  onState(state: ViewState): void;
  onFused(view: FusedView): void;
  onOverlay(view: OverlayView | null): void;
  onPin(view: FusedView | null): void;
  onTrace(points: TracePoint[]): void;
  onError(message: string, retry: () => void): void;
  onBusy?(busy: boolean): void;
}

/** The metric strings the view shows, verbatim from the service headers. */
export function displayedMetrics(image: FusedImage): { psnr: string; ssim: string } {
  return {
    psnr: image.psnrText ?? "n/a",
    ssim: image.ssimText ?? "n/a",
  };
}

export const SLIDER_DEBOUNCE_MS = 80;

export class Controller {
  readonly trace = new SweepTrace();
  private current: ViewState;
  private info: SessionInfo | null = null;
  private readonly fusedGate = new LatestWins<FusedImage>();
  private readonly overlayGate = new LatestWins<ArrayBuffer>();
  private readonly pinGate = new LatestWins<FusedImage>();
  private readonly scheduleFused: Debounced<() => void>;
  private readonly scheduleOverlay: Debounced<() => void>;

  constructor(
    private readonly api: ApiClient,
    initial: ViewState,
    private readonly events: ControllerEvents,
    debounceMs: number = SLIDER_DEBOUNCE_MS,
  ) {
    this.current = initial;
    this.scheduleFused = debounce(() => void this.fetchFused(), debounceMs);
    this.scheduleOverlay = debounce(() => void this.fetchOverlay(), debounceMs);
  }

  state(): ViewState {
    return this.current;
  }

  session(): SessionInfo | null {
    return this.info;
  }

  /**
   * Adopt a session. With `restore` (URL navigation) the given state is
   * applied verbatim and refetched; otherwise the view resets to a fresh
   * look at the new session.
   */
  setSession(info: SessionInfo, restore?: ViewState): void {
    this.info = info;
    this.trace.clear();
    this.events.onTrace([]);
    if (restore !== undefined) {
      this.current = { ...restore, session: info.id };
      this.events.onState(this.current);
      void this.refresh();
      return;
    }
    this.update({ session: info.id, pin: null, zoom: null }, "none");
    this.events.onPin(null);
  }

  sourceAvailable(source: ConfidenceSource): boolean {
    if (this.info === null) return source === "none";
    return this.info.confidence_sources.includes(source);
  }

  private update(patch: Partial<ViewState>, fetch: "none" | "debounce" | "now"): void {
    this.current = { ...this.current, ...patch };
    this.events.onState(this.current);
    if (fetch === "debounce") {
      this.scheduleFused();
    } else if (fetch === "now") {
      this.scheduleFused.cancel();
      void this.fetchFused();
    }
  }

  setW(value: number): void {
    this.update({ w: clampWeight(value) }, "debounce");
  }

  setMode(mode: Mode): void {
    if (mode === this.current.mode) return;
    this.trace.clear();
    this.events.onTrace([]);
    this.update({ mode }, "now");
  }

  setSchedule(schedule: Schedule): void {
    // Schedule is fixed per session at creation time; this only steers the
    // next session the user creates.
    this.update({ schedule }, "none");
  }

  setConfSource(source: ConfidenceSource): void {
    if (source === this.current.confSource) return;
    const affectsFusion = this.current.mode === "dwt-conf";
    if (affectsFusion) {
      this.trace.clear();
      this.events.onTrace([]);
    }
    this.update({ confSource: source }, affectsFusion ? "now" : "none");
    this.refreshOverlay();
  }

  toggleOverlay(on: boolean): void {
    this.update({ overlay: on }, "none");
    this.refreshOverlay();
  }

  setThreshold(value: number): void {
    this.update({ threshold: clampThreshold(value) }, "none");
    if (this.current.overlay) this.scheduleOverlay();
  }

  setOpacity(value: number): void {
    this.update({ opacity: clampUnit(value, this.current.opacity) }, "none");
  }

  setLayout(layout: PaneLayout): void {
    this.update({ layout }, "none");
  }

  setZoom(zoom: ZoomRect | null): void {
    this.update({ zoom }, "none");
  }

  setWipe(position: number): void {
    this.update({ wipe: clampUnit(position, 0.5) }, "none");
  }

  pinCurrent(): void {
    const pin = pinTuple(this.current);
    this.update({ pin }, "none");
    void this.fetchPin(pin);
  }

  clearPin(): void {
    this.update({ pin: null }, "none");
    this.events.onPin(null);
  }

  /** Replace the whole state (URL navigation); refetches everything it needs. */
  applyState(state: ViewState): void {
    this.current = state;
    this.events.onState(this.current);
    this.trace.clear();
    this.events.onTrace([]);
    void this.refresh();
  }

  /** Fetch the current view immediately; used on load and by error retry. */
  async refresh(): Promise<void> {
    this.scheduleFused.cancel();
    await this.fetchFused();
    this.refreshOverlay();
    if (this.current.pin !== null) await this.fetchPin(this.current.pin);
  }

  private refreshOverlay(): void {
    this.scheduleOverlay.cancel();
    if (this.current.overlay && this.current.confSource !== "none") {
      void this.fetchOverlay();
    } else {
      this.overlayGate.cancel();
      this.events.onOverlay(null);
    }
  }

  private async fetchFused(): Promise<void> {
    if (this.current.session === "") return;
    const tuple = requestTuple(this.current);
    this.events.onBusy?.(true);
    try {
      const image = await this.fusedGate.run((signal) => this.api.fetchFused(tuple, signal));
      if (image === null) return;
      if (image.psnrText !== null) {
        this.trace.add(tuple.w, Number(image.psnrText));
        this.events.onTrace(this.trace.points());
      }
      this.events.onFused({ image, tuple, label: paneLabel(tuple.w) });
    } catch (error) {
      this.events.onError(errorMessage(error), () => void this.refresh());
    } finally {
      this.events.onBusy?.(false);
    }
  }

  private async fetchOverlay(): Promise<void> {
    const { session, confSource, threshold } = this.current;
    if (session === "" || confSource === "none") return;
    try {
      const bytes = await this.overlayGate.run((signal) =>
        this.api.fetchOverlay(session, confSource, threshold, signal),
      );
      if (bytes === null) return;
      this.events.onOverlay({ bytes, source: confSource, threshold });
    } catch (error) {
      this.events.onError(errorMessage(error), () => this.refreshOverlay());
    }
  }

  private async fetchPin(pin: PinTuple): Promise<void> {
    const tuple: RequestTuple = { session: this.current.session, ...pin };
    try {
      const image = await this.pinGate.run((signal) => this.api.fetchFused(tuple, signal));
      if (image === null) return;
      this.events.onPin({ image, tuple, label: paneLabel(tuple.w) });
    } catch (error) {
      this.events.onError(errorMessage(error), () => void this.fetchPin(pin));
    }
  }
}

function errorMessage(error: unknown): string {
  if (error instanceof Error) return error.message;
  return String(error);
}
