/**
 * Polling loop with coalescing: one request in flight at a time; ticks that
 * land while a request is outstanding are dropped, not queued.
 */

export class Poller {
  private timer: ReturnType<typeof setInterval> | null = null;
  private busy = false;

  constructor(
    private readonly action: () => Promise<void>,
    private readonly intervalMs: number = 2000,
  ) {}

  start(): void {
    if (this.timer !== null) return;
    void this.tick();
    this.timer = setInterval(() => void this.tick(), this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  async tick(): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      await this.action();
    } finally {
      this.busy = false;
    }
  }
}
