/**
 * Wipe-compare geometry. The pinned snapshot A sits below, the live view B
 * stacks on top clipped to the right of the seam; compositing is pure CSS.
 */

export function clampWipe(value: number): number {
  if (!Number.isFinite(value)) return 0.5;
  return Math.min(1, Math.max(0, value));
}

/** clip-path for the top pane (B): visible strictly right of the seam. */
export function wipeClip(position: number): string {
  const pct = clampWipe(position) * 100;
  return `inset(0 0 0 ${pct}%)`;
}

/** CSS left offset for the seam handle. */
export function seamLeft(position: number): string {
  return `${clampWipe(position) * 100}%`;
}
