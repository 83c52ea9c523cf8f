/**
 * Keeps at most one request of a kind in flight: starting a new one aborts
 * the previous, and a superseded task's result is dropped rather than
 * rendered over fresher data.
 */

export class LatestWins<T> {
  private controller: AbortController | null = null;
  private ticket = 0;

  /**
   * Run `task`; resolves to its result, or null when a newer run started
   * (or cancel() was called) before it settled. Errors from superseded or
   * aborted runs are swallowed; only the latest run's error propagates.
   */
  async run(task: (signal: AbortSignal) => Promise<T>): Promise<T | null> {
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;
    const ticket = ++this.ticket;
    try {
      const result = await task(controller.signal);
      return ticket === this.ticket ? result : null;
    } catch (error) {
      if (ticket !== this.ticket || controller.signal.aborted) return null;
      throw error;
    } finally {
      if (ticket === this.ticket) this.controller = null;
    }
  }

  cancel(): void {
    this.controller?.abort();
    this.controller = null;
    this.ticket += 1;
  }
}
