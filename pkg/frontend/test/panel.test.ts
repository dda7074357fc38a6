import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/client";
import { renderPanel, snippet, statusLabel } from "../src/render";
import { SessionController } from "../src/session";
import {
  MockService,
  candidate,
  doneEvent,
  pauseEvent,
  tokenEvent,
} from "./mock_service";

function wired(mock: MockService): SessionController {
  return new SessionController(new ApiClient("http://mock", mock.fetch));
}

describe("pause panel", () => {
  it("is visible exactly when the server says paused-at-ret", async () => {
    const mock = new MockService({
      streams: [
        [tokenEvent("a"), pauseEvent([candidate("r1", 0.5)])],
        [tokenEvent(" b"), doneEvent()],
      ],
    });
    const c = wired(mock);
    await c.create("t");
    expect(c.view.panelVisible).toBe(false);
    await c.stream();
    expect(c.view.panelVisible).toBe(true);
    await c.accept("r1");
    expect(c.view.panelVisible).toBe(false);
    expect(c.view.candidates).toBeNull();
  });

  it("shows the server-provided candidates only, order untouched", async () => {
    // deliberately not sorted by score: the client must not reorder
    const sent = [candidate("r9", 0.2), candidate("r1", 0.9), candidate("r5", 0.5)];
    const mock = new MockService({ streams: [[pauseEvent(sent)]] });
    const c = wired(mock);
    await c.create("t");
    await c.stream();
    expect(c.view.candidates).toEqual(sent);
    const items = renderPanel(c.view.candidates!);
    expect(items.map((i) => i.refId)).toEqual(["r9", "r1", "r5"]);
    expect(items.map((i) => i.score)).toEqual([0.2, 0.9, 0.5]);
  });

  it("never fabricates citation keys: chips all came from server events", async () => {
    const mock = new MockService({
      streams: [
        [pauseEvent([candidate("r1", 0.9), candidate("r2", 0.8)])],
        [pauseEvent([candidate("r7", 0.6)])],
        [doneEvent()],
      ],
    });
    const c = wired(mock);
    await c.create("t");
    await c.stream();
    await c.accept("r1");
    await c.stream();
    await c.accept("r7");
    await c.stream();
    for (const key of c.view.chipKeys) {
      expect(mock.issuedKeys).toContain(key);
    }
    expect(c.view.chipKeys).toEqual(["r1", "r7"]);
  });

  it("truncates abstract snippets at 160 characters, keeping the full text", () => {
    const long = "w".repeat(400);
    const items = renderPanel([candidate("r1", 0.5, "title", long)]);
    expect(items[0]!.snippet.length).toBe(160);
    expect(items[0]!.snippet.endsWith("…")).toBe(true);
    expect(items[0]!.fullAbstract).toBe(long);
    expect(snippet("short abstract")).toBe("short abstract");
  });

  it("status labels track the machine states", () => {
    expect(statusLabel("generating", null)).toBe("drafting");
    expect(statusLabel("paused-at-ret", null)).toBe("citation needed");
    expect(statusLabel("done", null)).toBe("finished");
    expect(statusLabel("generating", "busy: capacity")).toBe("queued: busy: capacity");
  });
});
