/**
 * Refresh scheduling for the highlight mirror: requests go out 2 seconds
 * after the last keystroke, carrying the full source when it is small
 * and the accumulated change list otherwise.
 */

export const REFRESH_DELAY_MS = 2000;
export const FULL_TEXT_LIMIT = 10 * 1024;

export interface Change {
  from: number;
  to: number;
  insert: string;
}

export type RefreshPayload =
  | { text: string }
  | { changes: Change[]; generation: number };

export interface RefreshResult {
  generation: number;
  stale?: boolean;
}

type Sender = (payload: RefreshPayload) => Promise<RefreshResult>;

export class RefreshScheduler {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private changes: Change[] = [];
  private text = "";
  generation = 0;

  constructor(
    private readonly send: Sender,
    private readonly fullTextLimit = FULL_TEXT_LIMIT,
    private readonly delayMs = REFRESH_DELAY_MS
  ) {}

  /** Record one edit; (re)starts the debounce window. */
  noteChange(change: Change, fullText: string): void {
    this.changes.push(change);
    this.text = fullText;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => void this.fire(), this.delayMs);
  }

  get pending(): boolean {
    return this.timer !== null;
  }

  async fire(): Promise<void> {
    this.timer = null;
    const changes = this.changes;
    this.changes = [];
    let payload: RefreshPayload;
    if (this.text.length < this.fullTextLimit || this.generation === 0) {
      payload = { text: this.text };
    } else {
      payload = { changes, generation: this.generation };
    }
    const result = await this.send(payload);
    if (result.stale) {
      // the mirror diverged (lost on a server restart, for instance):
      // recover by resending the full source
      const recovered = await this.send({ text: this.text });
      this.generation = recovered.generation;
      return;
    }
    this.generation = result.generation;
  }
}
