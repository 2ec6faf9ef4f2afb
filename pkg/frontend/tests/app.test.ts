// @vitest-environment happy-dom
import { readFileSync } from "node:fs";
import { resolve } from "node:path";
import { afterEach, describe, expect, it, vi } from "vitest";

import type { ActionBody, SessionView, TreeNodeView } from "../src/api.js";
import { ApiClient } from "../src/api.js";
import { SchemaSessionApp } from "../src/app.js";
import { suggestEntities } from "../src/entities.js";

interface MockNode {
  node_id: number;
  step: number;
  event: string;
  parent: number | null;
}

/** In-memory stand-in for the session service, faithful to its semantics for
 * one session: candidate slates are deterministic per batch, counters follow
 * the engine rules, and every posted action body is recorded. */
class MockService {
  actionLog: ActionBody[] = [];
  entityLog: Array<string | null> = [];
  secondsRemaining = 240;
  failNextRequest = false;

  private sessionId = "mock-session";
  private variant = "elm";
  private state: SessionView["state"] = "awaiting_action";
  private nodes: MockNode[] = [];
  private cursor = 0;
  private accepted = 0;
  private rejected = 0;
  private resamples = 0;
  private batch = 0;

  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    if (this.failNextRequest) {
      this.failNextRequest = false;
      throw new Error("connection refused");
    }
    const body = init?.body ? JSON.parse(String(init.body)) : {};
    if (url.endsWith("/sessions") && init?.method === "POST") {
      if (!String(body.seed ?? "").trim()) {
        return this.json({ detail: "seed event must be non-empty" }, 400);
      }
      this.variant = body.variant ?? "elm";
      this.nodes = [{ node_id: 0, step: 0, event: body.seed, parent: null }];
      this.state = this.variant === "qgelm" ? "awaiting_entity" : "awaiting_action";
      return this.json(this.view(), 201);
    }
    if (url.endsWith("/entity")) {
      if (this.state !== "awaiting_entity") {
        return this.json({ detail: "not awaiting an entity" }, 409);
      }
      this.entityLog.push(body.entity ?? null);
      this.state = "awaiting_action";
      this.batch += 1;
      return this.json(this.view());
    }
    if (url.endsWith("/actions")) {
      if (this.state === "finished") return this.json({ detail: "finished" }, 410);
      const action = body as ActionBody;
      const applied = this.apply(action);
      if (!applied) return this.json({ detail: "invalid action" }, 422);
      this.actionLog.push(action);
      return this.json(this.view());
    }
    return this.json(this.view());
  };

  private apply(action: ActionBody): boolean {
    switch (action.kind) {
      case "select": {
        if (this.state !== "awaiting_action") return false;
        if (action.index < 0 || action.index > 3) return false;
        const node: MockNode = {
          node_id: this.nodes.length,
          step: this.accepted + 1,
          event: `event ${this.batch} ${action.index}`,
          parent: this.cursor,
        };
        this.nodes.push(node);
        this.cursor = node.node_id;
        this.accepted += 1;
        if (this.variant === "qgelm") {
          this.state = "awaiting_entity";
        } else {
          this.batch += 1;
        }
        return true;
      }
      case "regenerate":
        if (this.state !== "awaiting_action") return false;
        this.resamples += 1;
        this.rejected += 1;
        this.batch += 1;
        return true;
      case "return": {
        if (this.state !== "awaiting_action") return false;
        const target = this.nodes.find((n) => n.step === action.step);
        if (!target) return false;
        this.cursor = target.node_id;
        this.rejected += 1;
        this.batch += 1;
        return true;
      }
      case "stop":
        this.state = "finished";
        return true;
    }
  }

  private tree(): TreeNodeView {
    const build = (node: MockNode): TreeNodeView => ({
      node_id: node.node_id,
      step: node.step,
      event: node.event,
      children: this.nodes.filter((n) => n.parent === node.node_id).map(build),
    });
    return build(this.nodes[0]);
  }

  private depth(): number {
    const depthOf = (node: MockNode): number =>
      node.parent === null ? 0 : 1 + depthOf(this.nodes[node.parent]);
    return Math.max(...this.nodes.map(depthOf));
  }

  view(): SessionView {
    const total = this.accepted + this.rejected;
    return {
      session_id: this.sessionId,
      state: this.state,
      variant: this.variant,
      step_index: this.nodes[this.cursor]?.step ?? 0,
      cursor: this.cursor,
      candidates:
        this.state === "awaiting_action"
          ? [0, 1, 2, 3].map((i) => ({ index: i, text: `event ${this.batch} ${i}` }))
          : [],
      tree: this.tree(),
      metrics: {
        accepted_events: this.accepted,
        rejected_steps: this.rejected,
        pct_rejected: total ? (100 * this.rejected) / total : 0,
        resamples: this.resamples,
        total_steps: total,
        tree_depth: this.depth(),
      },
      seconds_remaining: this.secondsRemaining,
    };
  }

  private json(payload: unknown, status = 200): Response {
    return new Response(JSON.stringify(payload), {
      status,
      headers: { "content-type": "application/json" },
    });
  }
}

function mountApp(mock: MockService, tickMs = 1000) {
  const root = document.createElement("div");
  document.body.replaceChildren(root);
  const app = new SchemaSessionApp({
    client: new ApiClient("", mock.fetch),
    tickMs,
  });
  app.mount(root);
  return { app, root };
}

async function flush() {
  for (let i = 0; i < 6; i++) await Promise.resolve();
}

function setInput(root: HTMLElement, selector: string, value: string) {
  const input = root.querySelector(selector) as HTMLInputElement;
  input.value = value;
  input.dispatchEvent(new Event("input", { bubbles: true }));
}

function click(root: HTMLElement, selector: string) {
  const button = root.querySelector(selector) as HTMLButtonElement;
  expect(button, `missing element ${selector}`).toBeTruthy();
  button.click();
}

async function startSession(root: HTMLElement, variant: string, seed: string) {
  setInput(root, "[data-testid=seed-input]", seed);
  const select = root.querySelector("[data-testid=variant-select]") as HTMLSelectElement;
  select.value = variant;
  select.dispatchEvent(new Event("change", { bubbles: true }));
  click(root, "[data-testid=start-button]");
  await flush();
}

// vitest runs from frontend/; the golden log lives in the python test data
const GOLDEN_ACTIONS: ActionBody[] = readFileSync(
  resolve(process.cwd(), "../tests/data/golden_session_log.jsonl"),
  "utf-8",
)
  .trim()
  .split("\n")
  .map((line) => JSON.parse(line))
  .filter((record) => record.kind === "action")
  .map((record) => record.payload as ActionBody);

afterEach(() => {
  vi.useRealTimers();
  document.body.replaceChildren();
});

describe("seed screen", () => {
  it("disables start until a seed is typed", async () => {
    const { root } = mountApp(new MockService());
    const button = root.querySelector("[data-testid=start-button]") as HTMLButtonElement;
    expect(button.disabled).toBe(true);
    setInput(root, "[data-testid=seed-input]", "the flood hit the town");
    expect(
      (root.querySelector("[data-testid=start-button]") as HTMLButtonElement).disabled,
    ).toBe(false);
  });

  it("shows a retryable banner when the service is down", async () => {
    const mock = new MockService();
    mock.failNextRequest = true;
    const { root } = mountApp(mock);
    await startSession(root, "elm", "the flood hit the town");
    expect(root.querySelector("[data-testid=error-banner]")).toBeTruthy();
    click(root, "[data-testid=retry-button]");
    await flush();
    expect(root.querySelector("[data-testid=candidate-panel]")).toBeTruthy();
  });

  it("surfaces service validation errors inline", async () => {
    const { root } = mountApp(new MockService());
    setInput(root, "[data-testid=seed-input]", "   ");
    const button = root.querySelector("[data-testid=start-button]") as HTMLButtonElement;
    expect(button.disabled).toBe(true);
  });
});

describe("golden replay through the ui", () => {
  it("posts exactly the golden action log and shows depth 3", async () => {
    const mock = new MockService();
    const { root } = mountApp(mock);
    await startSession(root, "elm", "police evacuated the buildings");

    click(root, "[data-testid=candidate-0]");
    await flush();
    click(root, "[data-testid=candidate-1]");
    await flush();
    click(root, "[data-testid=regenerate]");
    await flush();
    click(root, "[data-testid=candidate-2]");
    await flush();
    click(root, "[data-testid=tree-node-1]");
    await flush();
    click(root, "[data-testid=candidate-3]");
    await flush();
    click(root, "[data-testid=stop]");
    await flush();

    expect(mock.actionLog).toEqual(GOLDEN_ACTIONS);
    const badge = root.querySelector("[data-testid=depth-badge]")!;
    expect(badge.textContent).toBe("depth 3");
    expect(root.querySelector("[data-testid=metrics]")!.textContent).toContain("accepted 4");
    const buttons = Array.from(root.querySelectorAll("button")) as HTMLButtonElement[];
    expect(buttons.length).toBeGreaterThan(0);
    for (const button of buttons) expect(button.disabled).toBe(true);
  });

  it("never double-submits one step", async () => {
    const mock = new MockService();
    const { root } = mountApp(mock);
    await startSession(root, "elm", "police evacuated the buildings");
    const button = root.querySelector("[data-testid=candidate-0]") as HTMLButtonElement;
    button.click();
    button.click(); // second click lands while the first is pending
    await flush();
    expect(mock.actionLog).toEqual([{ kind: "select", index: 0 }]);
  });
});

describe("entity screen", () => {
  it("question-guided sessions ask for an entity and suggest context phrases", async () => {
    const mock = new MockService();
    const { root } = mountApp(mock);
    await startSession(root, "qgelm", "the cyberattack disrupted services");
    expect(root.querySelector("[data-testid=entity-panel]")).toBeTruthy();
    const suggestion = root.querySelector("[data-testid=suggestion]") as HTMLButtonElement;
    expect(suggestion.textContent).toBe("the cyberattack");
    suggestion.click();
    await flush();
    expect(mock.entityLog).toEqual(["the cyberattack"]);
    expect(root.querySelector("[data-testid=candidate-panel]")).toBeTruthy();
  });

  it("selecting none asks the generic question", async () => {
    const mock = new MockService();
    const { root } = mountApp(mock);
    await startSession(root, "qgelm", "the cyberattack disrupted services");
    click(root, "[data-testid=entity-none]");
    await flush();
    expect(mock.entityLog).toEqual([null]);
  });
});

describe("timer", () => {
  it("expiry disables all controls and posts stop", async () => {
    vi.useFakeTimers();
    const mock = new MockService();
    mock.secondsRemaining = 3;
    const { root } = mountApp(mock);
    await startSession(root, "elm", "police evacuated the buildings");
    expect(mock.actionLog).toEqual([]);

    await vi.advanceTimersByTimeAsync(4000);
    expect(mock.actionLog).toEqual([{ kind: "stop" }]);
    const buttons = Array.from(root.querySelectorAll("button")) as HTMLButtonElement[];
    for (const button of buttons) expect(button.disabled).toBe(true);
  });

  it("counts down from the server-provided remaining seconds", async () => {
    vi.useFakeTimers();
    const mock = new MockService();
    mock.secondsRemaining = 120;
    const { root } = mountApp(mock);
    await startSession(root, "elm", "police evacuated the buildings");
    await vi.advanceTimersByTimeAsync(10_000);
    const badge = root.querySelector("[data-testid=countdown]")!;
    expect(badge.textContent).toBe("110s left");
  });
});

describe("entity suggestions", () => {
  it("harvests determiner phrases along the cursor path", () => {
    const view: SessionView = {
      session_id: "s",
      state: "awaiting_entity",
      variant: "qgelm",
      step_index: 1,
      cursor: 1,
      candidates: [],
      tree: {
        node_id: 0,
        step: 0,
        event: "the thief stole a rifle",
        children: [{ node_id: 1, step: 1, event: "police arrested him", children: [] }],
      },
      metrics: {
        accepted_events: 1,
        rejected_steps: 0,
        pct_rejected: 0,
        resamples: 0,
        total_steps: 1,
        tree_depth: 1,
      },
      seconds_remaining: 240,
    };
    expect(suggestEntities(view)).toEqual(["the thief", "a rifle", "police"]);
  });
});
