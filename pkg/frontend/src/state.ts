/**
 * Panel state and the app controller. Navigation is hash-routed
 * (#/summary/<session>, #/explorer/<session>, #/inspector/<session>/<key>);
 * the analysis state itself (filter stack, sort order) lives in the session
 * on the server, so a reload restores the analysis from the token alone.
 */

import { Client, FeatureCount, FilterBody } from "./api.js";
import { ExplorerState } from "./explorer.js";
import { InspectorState } from "./inspector.js";

export type Panel = "setup" | "summary" | "explorer" | "inspector";

export interface Route {
  panel: Panel;
  session: string | null;
  groupKey: string | null;
}

export function parseHash(hash: string): Route {
  const parts = hash.replace(/^#\/?/, "").split("/").filter((p) => p.length > 0);
  const panel = (parts[0] as Panel) || "setup";
  if (!["setup", "summary", "explorer", "inspector"].includes(panel)) {
    return { panel: "setup", session: null, groupKey: null };
  }
  return {
    panel,
    session: parts[1] ?? null,
    groupKey: parts[2] !== undefined ? decodeURIComponent(parts[2]) : null,
  };
}

export function toHash(route: Route): string {
  if (route.panel === "setup" || route.session === null) return "#/setup";
  if (route.panel === "inspector" && route.groupKey !== null) {
    return `#/inspector/${route.session}/${encodeURIComponent(route.groupKey)}`;
  }
  return `#/${route.panel}/${route.session}`;
}

export class AppState {
  route: Route = { panel: "setup", session: null, groupKey: null };
  page = 0;
  selection = new Set<string>();
  searchQuery = "";
  features: FeatureCount[] = [];
  inspector: InspectorState = {
    rowMode: "feature-order",
    colMode: "importance",
    hide: false,
    expanded: new Set(),
    page: 0,
    pageSize: 200,
  };
  /** One mutation in flight per session; reads may overlap. */
  busy = false;

  constructor(public client: Client, private rerender: () => Promise<void>,
              private setHash: (h: string) => void) {}

  explorerState(): ExplorerState {
    return { selection: this.selection, searchQuery: this.searchQuery,
             features: this.features };
  }

  navigate(panel: Panel, groupKey: string | null = null): Promise<void> {
    const sameMatrix = panel === "inspector" && groupKey === this.route.groupKey;
    this.route = { ...this.route, panel, groupKey };
    if (!sameMatrix) {
      this.inspector.expanded = new Set();
      this.inspector.page = 0;
    }
    this.setHash(toHash(this.route));
    return this.rerender();
  }

  async mutate(fn: () => Promise<unknown>): Promise<void> {
    if (this.busy || this.route.session === null) return;
    this.busy = true;
    try {
      await fn();
    } finally {
      this.busy = false;
    }
    await this.rerender();
  }

  pushFilter(filter: FilterBody): Promise<void> {
    const sid = this.route.session;
    return this.mutate(async () => {
      await this.client.pushFilter(sid!, filter);
      this.selection = new Set();
      this.page = 0;
    });
  }
}
