/**
 * PSNR-vs-w trace collected while the user drags the slider. Points come
 * from service metric headers; this module only scales them into an SVG
 * path, it never computes metrics.
 */

export interface TracePoint {
  w: number;
  psnr: number;
}

function key(w: number): number {
  return Math.round(w * 1e6) / 1e6;
}

export class SweepTrace {
  private readonly byW = new Map<number, number>();

  /** Record one observation; revisiting a weight replaces its point. Non-finite PSNR is skipped. */
  add(w: number, psnr: number): void {
    if (!Number.isFinite(psnr)) return;
    this.byW.set(key(w), psnr);
  }

  clear(): void {
    this.byW.clear();
  }

  points(): TracePoint[] {
    return [...this.byW.entries()]
      .map(([w, psnr]) => ({ w, psnr }))
      .sort((a, b) => a.w - b.w);
  }

  /** SVG path for a width x height viewBox; empty string until two points exist. */
  path(width: number, height: number, pad = 2): string {
    const pts = this.points();
    if (pts.length < 2) return "";
    let lo = Infinity;
    let hi = -Infinity;
    for (const p of pts) {
      lo = Math.min(lo, p.psnr);
      hi = Math.max(hi, p.psnr);
    }
    const span = hi - lo || 1;
    const sx = (w: number): number => pad + w * (width - 2 * pad);
    const sy = (psnr: number): number => height - pad - ((psnr - lo) / span) * (height - 2 * pad);
    return pts
      .map((p, i) => `${i === 0 ? "M" : "L"}${sx(p.w).toFixed(2)} ${sy(p.psnr).toFixed(2)}`)
      .join(" ");
  }
}
