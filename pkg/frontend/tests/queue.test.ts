import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { LabelSubmitter, advance, currentItem, remaining } from "../src/queue.js";

function clientWith(fetchImpl: (input: string, init?: RequestInit) => Promise<Response>) {
  return new ApiClient("http://service", fetchImpl);
}

const okResponse = () =>
  new Response(
    JSON.stringify({ pair_id: "p1", annotator_id: "A1", label: "yes", ts: "t" }),
    { status: 200 },
  );

describe("LabelSubmitter", () => {
  it("stores a label when the service accepts it", async () => {
    const submitter = new LabelSubmitter(clientWith(async () => okResponse()));
    const outcome = await submitter.submit("p1", "A1", "yes");
    expect(outcome.status).toBe("stored");
    expect(submitter.pending).toHaveLength(0);
  });

  it("surfaces server rejections for rollback", async () => {
    const submitter = new LabelSubmitter(
      clientWith(async () => new Response(JSON.stringify({ detail: "unknown pair" }), { status: 404 })),
    );
    const outcome = await submitter.submit("zz", "A1", "yes");
    expect(outcome.status).toBe("rejected");
    if (outcome.status === "rejected") {
      expect(outcome.detail).toContain("unknown pair");
    }
    expect(submitter.pending).toHaveLength(0);
  });

  it("queues offline submissions and flushes them later without loss", async () => {
    let online = false;
    const calls: string[] = [];
    const submitter = new LabelSubmitter(
      clientWith(async (input) => {
        if (!online) {
          throw new TypeError("fetch failed");
        }
        calls.push(input);
        return okResponse();
      }),
    );
    expect((await submitter.submit("p1", "A1", "yes")).status).toBe("queued");
    expect((await submitter.submit("p2", "A1", "no")).status).toBe("queued");
    expect(submitter.pending).toHaveLength(2);

    online = true;
    const flushed = await submitter.flush();
    expect(flushed).toBe(2);
    expect(submitter.pending).toHaveLength(0);
    expect(calls).toHaveLength(2);
    expect(calls[0]).toContain("p1");
    expect(calls[1]).toContain("p2");
  });

  it("stops flushing at the first transport failure and keeps the rest", async () => {
    let calls = 0;
    const submitter = new LabelSubmitter(
      clientWith(async () => {
        calls += 1;
        if (calls > 1) {
          throw new TypeError("connection reset");
        }
        return okResponse();
      }),
    );
    submitter.pending.push(
      { pairId: "p1", annotatorId: "A1", label: "yes", attempts: 1 },
      { pairId: "p2", annotatorId: "A1", label: "no", attempts: 1 },
    );
    const flushed = await submitter.flush();
    expect(flushed).toBe(1);
    expect(submitter.pending).toHaveLength(1);
    expect(submitter.pending[0].pairId).toBe("p2");
  });
});

describe("queue state", () => {
  it("advances and reports remaining items", () => {
    let state = { items: ["a", "b", "c"], position: 0 };
    expect(currentItem(state)).toBe("a");
    expect(remaining(state)).toBe(3);
    state = advance(state);
    expect(currentItem(state)).toBe("b");
    state = advance(advance(state));
    expect(currentItem(state)).toBeUndefined();
    expect(remaining(state)).toBe(0);
  });
});
