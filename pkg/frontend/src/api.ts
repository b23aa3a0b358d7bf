/** Typed client for the diagnostics service. The UI computes no statistics:
 * every displayed number comes verbatim from these payloads. */

export interface GroupPayload {
  key: number[];
  names: string[];
  counts: { tp: number; fp: number; tn: number; fn: number };
  or: number | null;
  ci: [number | null, number | null];
  uncertain: boolean;
  corrected: boolean;
  size: number;
  positive_truth: number;
  key_path: string;
}

export interface StackEntry {
  depth: number;
  size: number;
  filter: Record<string, unknown> | null;
}

export interface GroupsPayload {
  groups: GroupPayload[];
  total_groups: number;
  page: number;
  page_size: number;
  sort: [string, string][];
  stack: StackEntry[];
}

export interface SummaryPayload {
  confusion: {
    tp: number; fp: number; tn: number; fn: number;
    predicted_positive: number; predicted_negative: number;
    truth_positive: number; truth_negative: number; total: number;
  };
  roc: {
    points: [number, number, number | null][];
    auc_train: number | null;
    auc_test: number;
    threshold: number;
    operating_point: [number, number];
  };
  histogram: {
    edges: number[];
    counts: { tp: number[]; fp: number[]; tn: number[]; fn: number[] };
  };
  accuracy: number;
}

export interface MatrixColumnPayload {
  feature: number;
  name: string;
  frequency: number;
  importance: number;
  hidden: boolean;
}

export interface MatrixRowPayload {
  active: number[];
  outcome: "TP" | "FP" | "TN" | "FN";
  count: number;
  ids: number[];
}

export interface MatrixPayload {
  columns: MatrixColumnPayload[];
  rows: MatrixRowPayload[];
  group: { key: number[]; size: number };
  total_rows: number;
}

export interface FeatureCount {
  feature: number;
  name: string;
  count: number;
}

export type FilterBody =
  | { kind: "score-range"; lo: number; hi: number }
  | { kind: "selection"; keys: number[][] }
  | { kind: "search"; query: string }
  | { kind: "condition"; metric: string; op: string; value: number };

export class ApiError extends Error {
  constructor(public code: number, message: string) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  const body = await resp.json();
  if (!resp.ok) {
    throw new ApiError(body.code ?? resp.status, body.message ?? resp.statusText);
  }
  return body as T;
}

export class Client {
  constructor(private base: string = "") {}

  listDatasets() {
    return request<{ name: string }[]>(`${this.base}/datasets`);
  }

  listModels() {
    return request<{ name: string }[]>(`${this.base}/models`);
  }

  listRuns() {
    return request<{ name: string }[]>(`${this.base}/runs`);
  }

  createSession(dataset: string, model: string, run: string) {
    return request<{ session: string; stack: StackEntry[] }>(`${this.base}/sessions`, {
      method: "POST",
      body: JSON.stringify({ dataset, model, run }),
    });
  }

  summary(sid: string) {
    return request<SummaryPayload>(`${this.base}/sessions/${sid}/summary`);
  }

  groups(sid: string, opts: { sort?: string; dir?: string; page?: number;
                              page_size?: number } = {}) {
    const params = new URLSearchParams();
    for (const [k, v] of Object.entries(opts)) {
      if (v !== undefined) params.set(k, String(v));
    }
    const qs = params.toString();
    return request<GroupsPayload>(`${this.base}/sessions/${sid}/groups${qs ? "?" + qs : ""}`);
  }

  features(sid: string) {
    return request<FeatureCount[]>(`${this.base}/sessions/${sid}/features`);
  }

  pushFilter(sid: string, filter: FilterBody) {
    return request<{ stack: StackEntry[] }>(`${this.base}/sessions/${sid}/filters`, {
      method: "POST",
      body: JSON.stringify(filter),
    });
  }

  popTo(sid: string, depth: number) {
    return request<{ stack: StackEntry[] }>(`${this.base}/sessions/${sid}/filters/pop`, {
      method: "POST",
      body: JSON.stringify({ depth }),
    });
  }

  matrix(sid: string, keyPath: string, opts: { rows?: string; cols?: string;
                                               hide?: number; page?: number;
                                               page_size?: number } = {}) {
    const params = new URLSearchParams();
    for (const [k, v] of Object.entries(opts)) {
      if (v !== undefined) params.set(k, String(v));
    }
    const qs = params.toString();
    return request<MatrixPayload>(
      `${this.base}/sessions/${sid}/groups/${encodeURIComponent(keyPath)}/matrix${qs ? "?" + qs : ""}`);
  }
}
