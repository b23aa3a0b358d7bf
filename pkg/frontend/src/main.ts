/** Browser bootstrap: routes panels, fetches payloads, mounts trees. */

import { Client } from "./api.js";
import { ExplorerActions, renderExplorer } from "./explorer.js";
import { InspectorActions, renderInspector } from "./inspector.js";
import { AppState, parseHash } from "./state.js";
import { SummaryActions, renderSummary } from "./summary.js";
import { VNode, h, replaceChildren } from "./vnode.js";

const client = new Client("");
const root = document.getElementById("app")!;

const state = new AppState(client, render, (hash) => {
  if (window.location.hash !== hash) window.location.hash = hash;
});

async function renderSetup(): Promise<VNode> {
  const [datasets, models, runs] = await Promise.all([
    client.listDatasets(), client.listModels(), client.listRuns()]);
  let dataset = datasets[0]?.name ?? "";
  let model = models[0]?.name ?? "";
  let run = runs[0]?.name ?? "";
  const pick = (label: string, options: { name: string }[], set: (v: string) => void) =>
    h("label", { class: "setup-field" }, label + " ",
      h("select", {
        onchange: (e?: unknown) => {
          const v = (e as { target?: { value?: string } })?.target?.value;
          if (v !== undefined) set(v);
        },
      }, options.map((o) => h("option", { value: o.name }, o.name))));
  return h("section", { class: "panel setup-panel" },
    h("h2", {}, "Open a diagnostic session"),
    pick("dataset", datasets, (v) => { dataset = v; }),
    pick("model", models, (v) => { model = v; }),
    pick("run", runs, (v) => { run = v; }),
    h("button", {
      class: "setup-open",
      onclick: async () => {
        const resp = await client.createSession(dataset, model, run);
        state.route.session = resp.session;
        await state.navigate("summary");
      },
    }, "open"));
}

function summaryActions(): SummaryActions {
  return {
    selectScoreRange: (lo, hi) => {
      void state.pushFilter({ kind: "score-range", lo, hi })
        .then(() => state.navigate("explorer"));
    },
  };
}

function explorerActions(): ExplorerActions {
  const sid = () => state.route.session!;
  return {
    setSort: (metric, dir) =>
      void state.mutate(() => client.groups(sid(), { sort: metric, dir })),
    pushSearch: (query) => void state.pushFilter({ kind: "search", query }),
    pushCondition: (metric, op, value) =>
      void state.pushFilter({ kind: "condition", metric, op, value }),
    pushSelection: (keys) => void state.pushFilter({ kind: "selection", keys }),
    popTo: (depth) => void state.mutate(() => client.popTo(sid(), depth)),
    openMatrix: (keyPath) => void state.navigate("inspector", keyPath),
    toggleSelect: (keyPath) => {
      if (state.selection.has(keyPath)) state.selection.delete(keyPath);
      else state.selection.add(keyPath);
      void render();
    },
    setPage: (page) => { state.page = page; void render(); },
    setSearchQuery: (query) => { state.searchQuery = query; void render(); },
  };
}

function inspectorActions(): InspectorActions {
  return {
    setOrder: (rows, cols) => {
      state.inspector.rowMode = rows;
      state.inspector.colMode = cols;
      void render();
    },
    setHide: (hide) => { state.inspector.hide = hide; state.inspector.page = 0; void render(); },
    setPage: (page) => { state.inspector.page = page; void render(); },
    toggleExpand: (rowKey) => {
      if (state.inspector.expanded.has(rowKey)) state.inspector.expanded.delete(rowKey);
      else state.inspector.expanded.add(rowKey);
      void render();
    },
    backToExplorer: () => void state.navigate("explorer"),
  };
}

function nav(): VNode {
  const tab = (panel: "summary" | "explorer", label: string) =>
    h("button", {
      class: "nav-tab" + (state.route.panel === panel ? " active" : ""),
      onclick: () => void state.navigate(panel),
    }, label);
  return h("nav", { class: "topnav" },
    h("span", { class: "brand" }, "flipscope"),
    tab("summary", "Summary"),
    tab("explorer", "Explorer"));
}

async function render(): Promise<void> {
  try {
    const route = state.route;
    let body: VNode;
    if (route.panel === "setup" || route.session === null) {
      body = await renderSetup();
    } else if (route.panel === "summary") {
      body = renderSummary(await client.summary(route.session), summaryActions());
    } else if (route.panel === "explorer") {
      const [groups, features] = await Promise.all([
        client.groups(route.session, { page: state.page }),
        client.features(route.session)]);
      state.features = features;
      body = renderExplorer(groups, state.explorerState(), explorerActions());
    } else {
      const m = await client.matrix(route.session, route.groupKey ?? "-", {
        rows: state.inspector.rowMode,
        cols: state.inspector.colMode,
        hide: state.inspector.hide ? 0 : undefined,
        page: state.inspector.page,
        page_size: state.inspector.pageSize,
      });
      body = renderInspector(m, state.inspector, inspectorActions());
    }
    replaceChildren(root as Element, h("div", { class: "app" }, nav(), body));
  } catch (err) {
    replaceChildren(root as Element,
      h("div", { class: "app" }, nav(),
        h("section", { class: "panel error-panel" },
          h("h2", {}, "Service error"),
          h("p", { class: "error-message" }, String(err)))));
  }
}

window.addEventListener("hashchange", () => {
  state.route = parseHash(window.location.hash);
  void render();
});

state.route = parseHash(window.location.hash);
void render();
