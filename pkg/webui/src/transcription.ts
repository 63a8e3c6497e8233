export type FeedbackMode = "none" | "asterisk" | "highlight";

/**
 * Copy-task state: a fixed target phrase and a keystroke budget of one
 * touch per character.  Touches beyond the budget are rejected so the
 * sample stays aligned one-to-one with the phrase.
 */
export class TranscriptionTask {
  typed = 0;

  constructor(
    readonly phrase: string,
    readonly mode: FeedbackMode = "highlight",
  ) {
    if (phrase.length === 0) throw new Error("empty task phrase");
  }

  get length(): number {
    return this.phrase.length;
  }

  get complete(): boolean {
    return this.typed === this.phrase.length;
  }

  /** Count one keystroke; false once the budget is spent. */
  accept(): boolean {
    if (this.typed >= this.phrase.length) return false;
    this.typed += 1;
    return true;
  }

  /** Length of the phrase prefix currently shown highlighted. */
  get highlighted(): number {
    return this.mode === "highlight" ? this.typed : 0;
  }

  /**
   * What the text region shows for the current decode: everything in
   * highlight mode, one asterisk per keystroke in asterisk mode, and
   * nothing until completion in none mode.
   */
  feedback(decoded: string): string {
    switch (this.mode) {
      case "none":
        return this.complete ? decoded : "";
      case "asterisk":
        return "*".repeat(this.typed);
      case "highlight":
        return decoded;
    }
  }

  reset(): void {
    this.typed = 0;
  }
}
