// Typed client for the session service. All UI state derives from the
// SessionView objects this client returns; nothing is mutated locally.

export type SessionState = "awaiting_entity" | "awaiting_action" | "finished";

export interface CandidateView {
  index: number;
  text: string;
}

export interface TreeNodeView {
  node_id: number;
  step: number;
  event: string;
  children: TreeNodeView[];
}

export interface MetricsView {
  accepted_events: number;
  rejected_steps: number;
  pct_rejected: number;
  resamples: number;
  total_steps: number;
  tree_depth: number;
}

export interface SessionView {
  session_id: string;
  state: SessionState;
  variant: string;
  step_index: number;
  cursor: number;
  candidates: CandidateView[];
  tree: TreeNodeView;
  metrics: MetricsView;
  seconds_remaining: number;
}

export type ActionBody =
  | { kind: "select"; index: number }
  | { kind: "regenerate" }
  | { kind: "return"; step: number }
  | { kind: "stop" };

export class ServiceError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<SessionView> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new ServiceError(0, `service unreachable: ${String(err)}`);
    }
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const detail = (body as { detail?: string }).detail ?? response.statusText;
      throw new ServiceError(response.status, detail);
    }
    return body as SessionView;
  }

  createSession(seed: string, variant: string, timeBudget?: number): Promise<SessionView> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ seed, variant, time_budget: timeBudget ?? null }),
    });
  }

  postEntity(sessionId: string, entity: string | null): Promise<SessionView> {
    return this.request(`/sessions/${sessionId}/entity`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ entity }),
    });
  }

  postAction(sessionId: string, action: ActionBody): Promise<SessionView> {
    return this.request(`/sessions/${sessionId}/actions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(action),
    });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request(`/sessions/${sessionId}`);
  }
}
