/**
 * DOM layer. Renders exactly what the controller callbacks deliver;
 * compositing (overlay opacity, wipe clipping, zoom scaling) is CSS on
 * service-provided images, never pixel work.
 */

import type { Controller, FusedView, OverlayView } from "./controller.js";
import { displayedMetrics } from "./controller.js";
import { confidenceAt, type ConfidenceGrid } from "./cmap.js";
import type { TracePoint } from "./sparkline.js";
import { SweepTrace } from "./sparkline.js";
import { seamLeft, wipeClip } from "./wipe.js";
import type { SessionInfo } from "./api.js";
import { SOURCES, type ConfidenceSource, type ViewState, type ZoomRect } from "./state.js";

function byId<T extends HTMLElement>(id: string): T {
  const element = document.getElementById(id);
  if (element === null) throw new Error(`missing element #${id}`);
  return element as T;
}

function setImage(img: HTMLImageElement, bytes: ArrayBuffer): void {
  const url = URL.createObjectURL(new Blob([bytes], { type: "image/png" }));
  const previous = img.src;
  img.src = url;
  if (previous.startsWith("blob:")) URL.revokeObjectURL(previous);
}

export class View {
  private controller: Controller | null = null;
  private getCmap: ((source: ConfidenceSource) => Promise<ConfidenceGrid>) | null = null;
  private cmapGrid: ConfidenceGrid | null = null;
  private readonly sparkModel = new SweepTrace();
  private lastRetry: (() => void) | null = null;

  private readonly workbench = byId<HTMLElement>("workbench");
  private readonly setup = byId<HTMLElement>("setup");
  private readonly sessionBadge = byId<HTMLSpanElement>("session-badge");
  private readonly modeSelect = byId<HTMLSelectElement>("mode-select");
  private readonly wSlider = byId<HTMLInputElement>("w-slider");
  private readonly wReadout = byId<HTMLSpanElement>("w-readout");
  private readonly paneLabelEl = byId<HTMLParagraphElement>("pane-label");
  private readonly infoReliable = byId<HTMLSpanElement>("info-reliable");
  private readonly infoDeep = byId<HTMLSpanElement>("info-deep");
  private readonly metricPsnr = byId<HTMLSpanElement>("metric-psnr");
  private readonly metricSsim = byId<HTMLSpanElement>("metric-ssim");
  private readonly sparkPath = byId<HTMLElement>("spark-path");
  private readonly confSelect = byId<HTMLSelectElement>("conf-select");
  private readonly overlayToggle = byId<HTMLInputElement>("overlay-toggle");
  private readonly thresholdSlider = byId<HTMLInputElement>("threshold-slider");
  private readonly thresholdReadout = byId<HTMLSpanElement>("threshold-readout");
  private readonly opacitySlider = byId<HTMLInputElement>("opacity-slider");
  private readonly opacityReadout = byId<HTMLSpanElement>("opacity-readout");
  private readonly hoverConf = byId<HTMLSpanElement>("hover-conf");
  private readonly pinButton = byId<HTMLButtonElement>("pin-button");
  private readonly clearPinButton = byId<HTMLButtonElement>("clear-pin-button");
  private readonly layoutSelect = byId<HTMLSelectElement>("layout-select");
  private readonly pinInfo = byId<HTMLParagraphElement>("pin-info");
  private readonly zoomReset = byId<HTMLButtonElement>("zoom-reset");
  private readonly errorBanner = byId<HTMLDivElement>("error-banner");
  private readonly errorText = byId<HTMLSpanElement>("error-text");
  private readonly errorRetry = byId<HTMLButtonElement>("error-retry");
  private readonly panes = byId<HTMLElement>("panes");
  private readonly paneA = byId<HTMLElement>("pane-a");
  private readonly imgA = byId<HTMLImageElement>("img-a");
  private readonly captionA = byId<HTMLSpanElement>("caption-a");
  private readonly imgB = byId<HTMLImageElement>("img-b");
  private readonly captionB = byId<HTMLSpanElement>("caption-b");
  private readonly imgOverlay = byId<HTMLImageElement>("img-overlay");
  private readonly rubberBand = byId<HTMLDivElement>("rubber-band");
  private readonly wipeSeam = byId<HTMLDivElement>("wipe-seam");

  bind(
    controller: Controller,
    getCmap: (source: ConfidenceSource) => Promise<ConfidenceGrid>,
  ): void {
    this.controller = controller;
    this.getCmap = getCmap;

    this.wSlider.addEventListener("input", () => {
      controller.setW(Number(this.wSlider.value));
    });
    this.modeSelect.addEventListener("change", () => {
      controller.setMode(this.modeSelect.value as never);
    });
    this.confSelect.addEventListener("change", () => {
      controller.setConfSource(this.confSelect.value as ConfidenceSource);
      this.refreshCmap();
    });
    this.overlayToggle.addEventListener("change", () => {
      controller.toggleOverlay(this.overlayToggle.checked);
    });
    this.thresholdSlider.addEventListener("input", () => {
      controller.setThreshold(Number(this.thresholdSlider.value));
    });
    this.opacitySlider.addEventListener("input", () => {
      controller.setOpacity(Number(this.opacitySlider.value));
    });
    this.layoutSelect.addEventListener("change", () => {
      controller.setLayout(this.layoutSelect.value as never);
    });
    this.pinButton.addEventListener("click", () => controller.pinCurrent());
    this.clearPinButton.addEventListener("click", () => controller.clearPin());
    this.zoomReset.addEventListener("click", () => controller.setZoom(null));
    this.errorRetry.addEventListener("click", () => {
      this.errorBanner.hidden = true;
      this.lastRetry?.();
    });

    this.bindZoomSelection();
    this.bindWipeDrag();
    this.bindHover();
  }

  showWorkbench(info: SessionInfo): void {
    this.setup.hidden = true;
    this.workbench.hidden = false;
    this.sessionBadge.hidden = false;
    this.sessionBadge.textContent = `session ${info.id} · ${info.width}x${info.height}`;
    this.infoReliable.textContent = info.reliable;
    this.infoDeep.textContent = info.deep;
    for (const option of this.confSelect.options) {
      const source = option.value as ConfidenceSource;
      const available = SOURCES.includes(source) && info.confidence_sources.includes(source);
      option.disabled = !available;
      option.title = available ? "" : "source unavailable for this session";
    }
  }

  onState(state: ViewState): void {
    this.wSlider.value = String(state.w);
    this.wReadout.textContent = state.w.toFixed(2);
    this.modeSelect.value = state.mode;
    this.confSelect.value = state.confSource;
    this.overlayToggle.checked = state.overlay;
    this.thresholdSlider.value = String(state.threshold);
    this.thresholdReadout.textContent = state.threshold.toFixed(2);
    this.opacitySlider.value = String(state.opacity);
    this.opacityReadout.textContent = state.opacity.toFixed(2);
    this.layoutSelect.value = state.layout;
    this.imgOverlay.style.opacity = String(state.opacity);
    this.imgOverlay.hidden = !state.overlay;
    this.clearPinButton.disabled = state.pin === null;
    this.applyLayout(state);
    this.applyZoom(state.zoom);
  }

  onFused(view: FusedView): void {
    setImage(this.imgB, view.image.bytes);
    this.paneLabelEl.textContent = view.label;
    this.captionB.textContent = `B: ${view.label}`;
    const metrics = displayedMetrics(view.image);
    this.metricPsnr.textContent = metrics.psnr;
    this.metricSsim.textContent = metrics.ssim;
    this.errorBanner.hidden = true;
  }

  onOverlay(view: OverlayView | null): void {
    if (view === null) {
      this.imgOverlay.hidden = true;
      return;
    }
    setImage(this.imgOverlay, view.bytes);
    this.imgOverlay.hidden = !this.overlayToggle.checked;
  }

  onPin(view: FusedView | null): void {
    if (view === null) {
      this.paneA.hidden = true;
      this.pinInfo.textContent = "";
      return;
    }
    this.paneA.hidden = false;
    setImage(this.imgA, view.image.bytes);
    const metrics = displayedMetrics(view.image);
    this.captionA.textContent = `A: ${view.label}`;
    this.pinInfo.textContent =
      `A: ${view.tuple.mode} w=${view.tuple.w} · PSNR ${metrics.psnr} · SSIM ${metrics.ssim}`;
  }

  onTrace(points: TracePoint[]): void {
    this.sparkModel.clear();
    for (const point of points) this.sparkModel.add(point.w, point.psnr);
    this.sparkPath.setAttribute("d", this.sparkModel.path(160, 48));
  }

  onError(message: string, retry: () => void): void {
    this.lastRetry = retry;
    this.errorText.textContent = message;
    this.errorBanner.hidden = false;
  }

  private applyLayout(state: ViewState): void {
    // Wipe needs a pinned A; fall back to side-by-side until one exists.
    const wipe = state.layout === "wipe" && state.pin !== null;
    this.panes.classList.toggle("wipe", wipe);
    this.panes.classList.toggle("side-by-side", !wipe);
    this.wipeSeam.hidden = !wipe;
    if (wipe) {
      this.panes.style.setProperty("--wipe-clip", wipeClip(state.wipe));
      this.wipeSeam.style.left = seamLeft(state.wipe);
    }
  }

  private applyZoom(zoom: ZoomRect | null): void {
    for (const img of [this.imgA, this.imgB, this.imgOverlay]) {
      if (zoom === null) {
        img.style.transform = "";
      } else {
        const scale = 1 / Math.max(zoom.w, zoom.h);
        img.style.transform =
          `scale(${scale}) translate(${-zoom.x * 100}%, ${-zoom.y * 100}%)`;
      }
    }
  }

  private bindZoomSelection(): void {
    const viewport = this.imgB.parentElement as HTMLElement;
    let startX = 0;
    let startY = 0;
    let dragging = false;

    viewport.addEventListener("mousedown", (event) => {
      dragging = true;
      const box = viewport.getBoundingClientRect();
      startX = event.clientX - box.left;
      startY = event.clientY - box.top;
    });
    viewport.addEventListener("mousemove", (event) => {
      if (!dragging) return;
      const box = viewport.getBoundingClientRect();
      const x = Math.min(startX, event.clientX - box.left);
      const y = Math.min(startY, event.clientY - box.top);
      this.rubberBand.hidden = false;
      this.rubberBand.style.left = `${x}px`;
      this.rubberBand.style.top = `${y}px`;
      this.rubberBand.style.width = `${Math.abs(event.clientX - box.left - startX)}px`;
      this.rubberBand.style.height = `${Math.abs(event.clientY - box.top - startY)}px`;
    });
    window.addEventListener("mouseup", (event) => {
      if (!dragging) return;
      dragging = false;
      this.rubberBand.hidden = true;
      const box = viewport.getBoundingClientRect();
      const endX = event.clientX - box.left;
      const endY = event.clientY - box.top;
      const w = Math.abs(endX - startX) / box.width;
      const h = Math.abs(endY - startY) / box.height;
      if (w < 0.02 || h < 0.02) return; // a click, not a selection
      const x = Math.max(0, Math.min(startX, endX) / box.width);
      const y = Math.max(0, Math.min(startY, endY) / box.height);
      this.controller?.setZoom({
        x,
        y,
        w: Math.min(w, 1 - x),
        h: Math.min(h, 1 - y),
      });
    });
    viewport.addEventListener("dblclick", () => this.controller?.setZoom(null));
  }

  private bindWipeDrag(): void {
    let dragging = false;
    this.wipeSeam.addEventListener("mousedown", () => {
      dragging = true;
    });
    window.addEventListener("mousemove", (event) => {
      if (!dragging) return;
      const box = this.panes.getBoundingClientRect();
      this.controller?.setWipe((event.clientX - box.left) / box.width);
    });
    window.addEventListener("mouseup", () => {
      dragging = false;
    });
  }

  private refreshCmap(): void {
    this.cmapGrid = null;
    this.hoverConf.textContent = "–";
    const source = this.confSelect.value as ConfidenceSource;
    if (source === "none" || this.getCmap === null) return;
    this.getCmap(source)
      .then((grid) => {
        this.cmapGrid = grid;
      })
      .catch(() => {
        this.cmapGrid = null;
      });
  }

  private bindHover(): void {
    this.imgB.addEventListener("mousemove", (event) => {
      if (this.cmapGrid === null) return;
      const scaleX = this.imgB.naturalWidth / this.imgB.clientWidth;
      const scaleY = this.imgB.naturalHeight / this.imgB.clientHeight;
      const value = confidenceAt(
        this.cmapGrid,
        event.offsetX * scaleX,
        event.offsetY * scaleY,
      );
      this.hoverConf.textContent = value.toPrecision(4);
    });
    this.imgB.addEventListener("mouseleave", () => {
      this.hoverConf.textContent = "–";
    });
  }
}
