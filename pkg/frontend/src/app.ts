import { ApiClient, ServiceError } from "./api.js";
import type { ActionBody, SessionView, TreeNodeView } from "./api.js";
import { suggestEntities } from "./entities.js";

// Selection criteria shown with every candidate (binary judgments the user
// applies before accepting an event).
const CRITERIA: Array<[string, string]> = [
  ["sensible", "grammatical, sensible, easy to understand"],
  ["unique", "does not duplicate an already accepted event"],
  ["on-topic", "related to the scenario domain"],
  ["typical", "common for this domain, not too niche"],
];

export interface AppOptions {
  client: ApiClient;
  now?: () => number;
  tickMs?: number;
}

type Attrs = Record<string, string | boolean | ((event: Event) => void)>;

function h(tag: string, attrs: Attrs = {}, children: Array<Node | string> = []): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === "function") {
      node.addEventListener(key, value);
    } else if (typeof value === "boolean") {
      if (value) node.setAttribute(key, "");
      (node as unknown as Record<string, unknown>)[key] = value;
    } else {
      node.setAttribute(key, value);
    }
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export class SchemaSessionApp {
  private readonly client: ApiClient;
  private readonly now: () => number;
  private readonly tickMs: number;

  private root: HTMLElement | null = null;
  private view: SessionView | null = null;
  private viewReceivedAt = 0;
  private pending = false;
  private error: string | null = null;
  private stopPosted = false;
  private timer: ReturnType<typeof setInterval> | null = null;
  private seedDraft = "";
  private variantDraft = "qgelm";
  private entityDraft = "";
  private returnDraft = "";

  constructor(options: AppOptions) {
    this.client = options.client;
    this.now = options.now ?? (() => Date.now());
    this.tickMs = options.tickMs ?? 1000;
  }

  mount(root: HTMLElement): void {
    this.root = root;
    this.timer = setInterval(() => this.tick(), this.tickMs);
    this.render();
  }

  unmount(): void {
    if (this.timer !== null) clearInterval(this.timer);
    this.timer = null;
    this.root = null;
  }

  secondsLeft(): number {
    if (!this.view) return 0;
    const elapsed = (this.now() - this.viewReceivedAt) / 1000;
    return Math.max(0, this.view.seconds_remaining - elapsed);
  }

  private locked(): boolean {
    return (
      !this.view ||
      this.view.state === "finished" ||
      this.stopPosted ||
      this.secondsLeft() <= 0
    );
  }

  private controlsDisabled(): boolean {
    return this.pending || this.locked();
  }

  private tick(): void {
    if (!this.view || this.view.state === "finished") return;
    if (this.secondsLeft() <= 0 && !this.stopPosted) {
      // authoritative expiry is server-side; the client mirrors it by
      // freezing the controls and closing the session
      this.stopPosted = true;
      this.render();
      void this.submit(() => this.client.postAction(this.view!.session_id, { kind: "stop" }));
      return;
    }
    const badge = this.root?.querySelector("[data-testid=countdown]");
    if (badge) badge.textContent = this.countdownText();
  }

  private countdownText(): string {
    return `${Math.ceil(this.secondsLeft())}s left`;
  }

  private async submit(call: () => Promise<SessionView>): Promise<void> {
    if (this.pending) return;
    this.pending = true;
    this.error = null;
    this.render();
    try {
      this.view = await call();
      this.viewReceivedAt = this.now();
    } catch (err) {
      this.error = err instanceof ServiceError ? err.message : String(err);
    } finally {
      this.pending = false;
      this.render();
    }
  }

  private postAction(action: ActionBody): void {
    if (this.controlsDisabled() || !this.view) return;
    void this.submit(() => this.client.postAction(this.view!.session_id, action));
  }

  // ---- rendering ----

  render(): void {
    if (!this.root) return;
    this.root.replaceChildren(this.view === null ? this.seedScreen() : this.sessionScreen());
  }

  private errorBanner(retry: () => void): HTMLElement {
    return h("div", { class: "banner error", "data-testid": "error-banner" }, [
      this.error ?? "",
      h("button", { "data-testid": "retry-button", click: retry }, ["retry"]),
    ]);
  }

  private seedScreen(): HTMLElement {
    const start = () => {
      if (!this.seedDraft.trim() || this.pending) return;
      void this.submit(() => this.client.createSession(this.seedDraft.trim(), this.variantDraft));
    };
    const children: Array<Node | string> = [
      h("h1", {}, ["start a schema session"]),
      h("input", {
        "data-testid": "seed-input",
        placeholder: "seed event, e.g. the cyberattack disrupted services",
        value: this.seedDraft,
        input: (event) => {
          this.seedDraft = (event.target as HTMLInputElement).value;
          const button = this.root?.querySelector("[data-testid=start-button]");
          if (button) (button as HTMLButtonElement).disabled = !this.seedDraft.trim() || this.pending;
        },
      }),
      h(
        "select",
        {
          "data-testid": "variant-select",
          change: (event) => {
            this.variantDraft = (event.target as HTMLSelectElement).value;
          },
        },
        ["qgelm", "elm", "egelm"].map((name) =>
          h("option", { value: name, ...(name === this.variantDraft ? { selected: true } : {}) }, [name]),
        ),
      ),
      h(
        "button",
        {
          "data-testid": "start-button",
          disabled: !this.seedDraft.trim() || this.pending,
          click: start,
        },
        ["start"],
      ),
    ];
    if (this.error !== null) children.push(this.errorBanner(start));
    return h("section", { class: "seed-screen" }, children);
  }

  private sessionScreen(): HTMLElement {
    const view = this.view!;
    const panels: Array<Node | string> = [
      h("header", {}, [
        h("span", { "data-testid": "countdown", class: "countdown" }, [this.countdownText()]),
        h("span", { "data-testid": "state-badge", class: "state" }, [view.state]),
        h("span", { "data-testid": "depth-badge", class: "depth" }, [
          `depth ${view.metrics.tree_depth}`,
        ]),
      ]),
    ];
    if (this.error !== null) panels.push(this.errorBanner(() => this.render()));
    if (view.state === "awaiting_entity") panels.push(this.entityPanel());
    if (view.state === "awaiting_action") panels.push(this.candidatePanel());
    if (view.state === "finished" || this.stopPosted) panels.push(this.summaryPanel());
    panels.push(this.treePanel());
    return h("section", { class: "session-screen" }, panels);
  }

  private entityPanel(): HTMLElement {
    const disabled = this.controlsDisabled();
    const ask = (entity: string | null) => {
      if (this.controlsDisabled()) return;
      void this.submit(() => this.client.postEntity(this.view!.session_id, entity));
    };
    const suggestions = suggestEntities(this.view!).map((text) =>
      h(
        "button",
        {
          class: "suggestion",
          "data-testid": "suggestion",
          disabled,
          click: () => {
            this.entityDraft = text;
            ask(text);
          },
        },
        [text],
      ),
    );
    return h("div", { class: "panel entity", "data-testid": "entity-panel" }, [
      h("p", {}, ["name an entity of interest, pick a suggestion, or continue without one"]),
      h("div", { class: "suggestions" }, suggestions),
      h("input", {
        "data-testid": "entity-input",
        value: this.entityDraft,
        disabled,
        input: (event) => {
          this.entityDraft = (event.target as HTMLInputElement).value;
        },
      }),
      h(
        "button",
        {
          "data-testid": "entity-submit",
          disabled,
          click: () => ask(this.entityDraft.trim() || null),
        },
        ["ask about it"],
      ),
      h(
        "button",
        { "data-testid": "entity-none", disabled, click: () => ask(null) },
        ["none"],
      ),
    ]);
  }

  private candidatePanel(): HTMLElement {
    const view = this.view!;
    const disabled = this.controlsDisabled();
    const hints = () =>
      h(
        "ul",
        { class: "criteria" },
        CRITERIA.map(([label, description]) => h("li", { title: description }, [label])),
      );
    const cards = view.candidates.map((candidate) =>
      h("li", { class: "candidate" }, [
        h("blockquote", {}, [candidate.text]),
        hints(),
        h(
          "button",
          {
            "data-testid": `candidate-${candidate.index}`,
            disabled,
            click: () => this.postAction({ kind: "select", index: candidate.index }),
          },
          ["select"],
        ),
      ]),
    );
    return h("div", { class: "panel candidates", "data-testid": "candidate-panel" }, [
      h("ol", {}, cards),
      h("div", { class: "controls" }, [
        h(
          "button",
          {
            "data-testid": "regenerate",
            disabled,
            click: () => this.postAction({ kind: "regenerate" }),
          },
          ["regenerate"],
        ),
        h("input", {
          "data-testid": "return-step-input",
          type: "number",
          value: this.returnDraft,
          disabled,
          input: (event) => {
            this.returnDraft = (event.target as HTMLInputElement).value;
          },
        }),
        h(
          "button",
          {
            "data-testid": "return-button",
            disabled,
            click: () => {
              const step = Number.parseInt(this.returnDraft, 10);
              if (!Number.isNaN(step)) this.postAction({ kind: "return", step });
            },
          },
          ["return to step"],
        ),
        h(
          "button",
          { "data-testid": "stop", disabled, click: () => this.postAction({ kind: "stop" }) },
          ["stop"],
        ),
      ]),
    ]);
  }

  private summaryPanel(): HTMLElement {
    const metrics = this.view!.metrics;
    return h("div", { class: "panel summary", "data-testid": "metrics" }, [
      h("p", {}, [
        `accepted ${metrics.accepted_events}, rejected ${metrics.rejected_steps}, ` +
          `resamples ${metrics.resamples}, total ${metrics.total_steps}, ` +
          `rejected ${metrics.pct_rejected.toFixed(1)}%, depth ${metrics.tree_depth}`,
      ]),
    ]);
  }

  private treePanel(): HTMLElement {
    const view = this.view!;
    const renderNode = (node: TreeNodeView): HTMLElement => {
      const isCursor = node.node_id === view.cursor;
      const label = h(
        "button",
        {
          class: isCursor ? "node cursor" : "node",
          "data-testid": `tree-node-${node.step}`,
          disabled: this.controlsDisabled() || view.state !== "awaiting_action",
          click: () => this.postAction({ kind: "return", step: node.step }),
        },
        [`${node.step}. ${node.event}`],
      );
      const children = node.children.map((child) => h("li", {}, [renderNode(child)]));
      const block = h("div", {}, [label]);
      if (children.length > 0) block.append(h("ul", {}, children));
      return block;
    };
    return h("div", { class: "panel tree", "data-testid": "tree" }, [renderNode(view.tree)]);
  }
}
