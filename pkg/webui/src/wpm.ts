// Words per minute as shown in the live indicator: five characters per
// word, n - 1 inter-key intervals over the first-to-last keystroke time.

export function wpm(chars: number, minutes: number): number {
  if (minutes <= 0) throw new Error("elapsed minutes must be positive");
  if (chars < 1) return 0;
  return (chars - 1) / 5 / minutes;
}

/** Tracks keystroke timestamps for the live display. */
export class WpmTimer {
  private firstMs: number | null = null;
  private lastMs = 0;

  mark(tMs: number): void {
    if (this.firstMs === null) this.firstMs = tMs;
    this.lastMs = tMs;
  }

  /** Live estimate for `chars` decoded characters; null before two keystrokes. */
  read(chars: number): number | null {
    if (this.firstMs === null || this.lastMs <= this.firstMs) return null;
    return wpm(chars, (this.lastMs - this.firstMs) / 60000);
  }

  reset(): void {
    this.firstMs = null;
    this.lastMs = 0;
  }
}
