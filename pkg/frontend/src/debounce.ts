/** Trailing-edge debounce; keeps slider drags from flooding the service. */

export interface Debounced<T extends (...args: never[]) => void> {
  (...args: Parameters<T>): void;
  cancel(): void;
  /** Run a pending call immediately (no-op when none is pending). */
  flush(): void;
  pending(): boolean;
}

export function debounce<T extends (...args: never[]) => void>(
  fn: T,
  delayMs: number,
): Debounced<T> {
  let timer: ReturnType<typeof setTimeout> | null = null;
  let lastArgs: Parameters<T> | null = null;

  const debounced = ((...args: Parameters<T>) => {
    lastArgs = args;
    if (timer !== null) clearTimeout(timer);
    timer = setTimeout(() => {
      timer = null;
      const callArgs = lastArgs!;
      lastArgs = null;
      fn(...callArgs);
    }, delayMs);
  }) as Debounced<T>;

  debounced.cancel = () => {
    if (timer !== null) clearTimeout(timer);
    timer = null;
    lastArgs = null;
  };

  debounced.flush = () => {
    if (timer === null) return;
    clearTimeout(timer);
    timer = null;
    const callArgs = lastArgs!;
    lastArgs = null;
    fn(...callArgs);
  };

  debounced.pending = () => timer !== null;

  return debounced;
}
