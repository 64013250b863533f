// Submission pipeline with optimistic updates and an offline retry queue:
// a label either reaches the server or stays visibly pending, never lost.

import type { ApiClient } from "./api.js";
import { ApiError } from "./api.js";
import type { WireLabel } from "./types.js";

export interface PendingSubmission {
  pairId: string;
  annotatorId: string;
  label: WireLabel;
  attempts: number;
}

export type SubmissionOutcome =
  | { status: "stored" }
  | { status: "rejected"; detail: string }
  | { status: "queued" };

export class LabelSubmitter {
  readonly pending: PendingSubmission[] = [];

  constructor(private api: ApiClient) {}

  /**
   * Try to store a label. Server-side rejections (4xx) surface immediately
   * so the UI can revert the optimistic choice; transport failures park the
   * submission in the retry queue.
   */
  async submit(
    pairId: string,
    annotatorId: string,
    label: WireLabel,
  ): Promise<SubmissionOutcome> {
    try {
      await this.api.submitLabel(pairId, annotatorId, label);
      return { status: "stored" };
    } catch (error) {
      if (error instanceof ApiError) {
        return { status: "rejected", detail: error.detail };
      }
      this.pending.push({ pairId, annotatorId, label, attempts: 1 });
      return { status: "queued" };
    }
  }

  /** Retry queued submissions in order; stops at the first network failure. */
  async flush(): Promise<number> {
    let stored = 0;
    while (this.pending.length > 0) {
      const head = this.pending[0];
      try {
        await this.api.submitLabel(head.pairId, head.annotatorId, head.label);
        this.pending.shift();
        stored += 1;
      } catch (error) {
        if (error instanceof ApiError) {
          // rejected by the server: drop from the retry queue, surface later
          this.pending.shift();
          throw error;
        }
        head.attempts += 1;
        break;
      }
    }
    return stored;
  }
}

export interface QueueState<T> {
  items: T[];
  position: number;
}

export function currentItem<T>(state: QueueState<T>): T | undefined {
  return state.items[state.position];
}

export function remaining<T>(state: QueueState<T>): number {
  return Math.max(0, state.items.length - state.position);
}

export function advance<T>(state: QueueState<T>): QueueState<T> {
  return { items: state.items, position: Math.min(state.position + 1, state.items.length) };
}

export function retreat<T>(state: QueueState<T>): QueueState<T> {
  return { items: state.items, position: Math.max(0, state.position - 1) };
}
