/**
 * Explanation explorer: one row per decision group with the feature key
 * (first three features plus an overflow marker, full names in the tooltip),
 * the stacked predicted-outcome distribution (blue = predicted positive,
 * orange = predicted negative, hatched = incorrect), the group size bar
 * relative to the largest group split by ground truth in two grays, the
 * odds ratio on a log scale with CI whiskers (red when the interval crosses
 * one), and a drill-down arrow. The left rail holds the search box with
 * suggestions, the conditioning widget, the filter stack, and the sort list.
 */

import type { FeatureCount, GroupPayload, GroupsPayload } from "./api.js";
import { completeQuery, fmtRatio, suggestionsFor, truncateKey } from "./format.js";
import { logScale, oddsExtent } from "./scale.js";
import { VNode, h } from "./vnode.js";

export interface ExplorerActions {
  setSort(metric: string, dir: "asc" | "desc"): void;
  pushSearch(query: string): void;
  pushCondition(metric: string, op: string, value: number): void;
  pushSelection(keys: number[][]): void;
  popTo(depth: number): void;
  openMatrix(keyPath: string): void;
  toggleSelect(keyPath: string): void;
  setPage(page: number): void;
  setSearchQuery(query: string): void;
}

export interface ExplorerState {
  selection: Set<string>;
  searchQuery: string;
  features: FeatureCount[];
}

const SORT_METRICS = ["total", "positive_truth", "predicted_positive",
                      "incorrect_count", "odds_ratio", "uncertainty", "lexicographic"];
const OR_WIDTH = 170;

function keyCell(g: GroupPayload): VNode {
  const { shown, overflow } = truncateKey(g.names);
  return h("td", { class: "group-key", title: g.names.join(", ") || "(no features)" },
    shown.map((n) => h("span", { class: "key-feature" }, n)),
    overflow !== null && h("span", { class: "key-overflow" }, overflow),
    g.names.length === 0 && h("span", { class: "key-empty" }, "(empty)"));
}

function outcomeBar(g: GroupPayload): VNode {
  const total = Math.max(g.size, 1);
  const seg = (cls: string, label: string, count: number) =>
    count > 0
      ? h("div", {
          class: `outcome-seg ${cls}`,
          style: `width:${(100 * count) / total}%`,
          title: `${label}: ${count}`,
        }, String(count))
      : null;
  return h("td", { class: "group-outcomes" },
    h("div", { class: "outcome-bar" },
      seg("pred-pos", "TP", g.counts.tp),
      seg("pred-pos hatched", "FP", g.counts.fp),
      seg("pred-neg", "TN", g.counts.tn),
      seg("pred-neg hatched", "FN", g.counts.fn)));
}

function sizeBar(g: GroupPayload, maxSize: number): VNode {
  const width = (100 * g.size) / Math.max(maxSize, 1);
  const posWidth = g.size > 0 ? (100 * g.positive_truth) / g.size : 0;
  return h("td", { class: "group-size" },
    h("div", { class: "size-bar", style: `width:${width}%` },
      h("div", { class: "size-pos", style: `width:${posWidth}%` }),
      h("div", { class: "size-neg", style: `width:${100 - posWidth}%` })),
    h("span", { class: "size-text" }, `${g.size} (${g.positive_truth}+)`));
}

function oddsCell(g: GroupPayload, scale: (v: number) => number): VNode {
  if (g.or === null || g.ci[0] === null || g.ci[1] === null) {
    return h("td", { class: "group-or" }, h("span", { class: "or-na" }, "n/a"));
  }
  const cls = g.uncertain ? "or-uncertain" : "or-significant";
  const x1 = scale(g.ci[0]);
  const x2 = scale(g.ci[1]);
  const xo = scale(g.or);
  const mid = scale(1.0);
  return h("td", { class: "group-or" },
    h("svg", { class: `or-plot ${cls}`, width: OR_WIDTH, height: 18,
               viewBox: `0 0 ${OR_WIDTH} 18` },
      h("line", { class: "or-axis-one", x1: mid, y1: 0, x2: mid, y2: 18 }),
      h("line", { class: `or-whisker ${cls}`, x1, y1: 9, x2, y2: 9,
                  "data-lo": g.ci[0], "data-hi": g.ci[1] }),
      h("line", { class: `or-whisker-cap ${cls}`, x1, y1: 4, x2: x1, y2: 14 }),
      h("line", { class: `or-whisker-cap ${cls}`, x1: x2, y1: 4, x2, y2: 14 }),
      h("circle", { class: `or-dot ${cls}`, cx: xo, cy: 9, r: 3.5 }),
      h("title", {}, `OR ${fmtRatio(g.or)} CI [${fmtRatio(g.ci[0])}, ${fmtRatio(g.ci[1])}]`
        + (g.corrected ? " (corrected)" : ""))),
    h("span", { class: "or-text" }, fmtRatio(g.or)));
}

function groupRow(g: GroupPayload, maxSize: number, scale: (v: number) => number,
                  state: ExplorerState, actions: ExplorerActions): VNode {
  const selected = state.selection.has(g.key_path);
  return h("tr", {
      class: `group-row${selected ? " selected" : ""}`,
      "data-key": g.key_path,
      onclick: () => actions.toggleSelect(g.key_path),
    },
    keyCell(g),
    outcomeBar(g),
    sizeBar(g, maxSize),
    oddsCell(g, scale),
    h("td", { class: "group-actions" },
      h("button", {
        class: "drill-down", title: "inspect items",
        onclick: () => actions.openMatrix(g.key_path),
      }, "→")));
}

function searchBox(state: ExplorerState, actions: ExplorerActions): VNode {
  const suggestions = state.searchQuery
    ? suggestionsFor(state.searchQuery, state.features)
    : [];
  return h("div", { class: "search-box" },
    h("input", {
      class: "search-input", type: "text", value: state.searchQuery,
      placeholder: "feature, feature (comma = AND)",
      oninput: (e?: unknown) => {
        const target = (e as { target?: { value?: string } })?.target;
        if (target?.value !== undefined) actions.setSearchQuery(target.value);
      },
      onkeydown: (e?: unknown) => {
        if ((e as { key?: string })?.key === "Enter") {
          actions.pushSearch(state.searchQuery);
        }
      },
    }),
    h("button", { class: "search-go", onclick: () => actions.pushSearch(state.searchQuery) },
      "search"),
    suggestions.length > 0 && h("ul", { class: "suggestions" },
      suggestions.map((f) =>
        h("li", {
          class: "suggestion", "data-feature": f.feature,
          onclick: () => actions.setSearchQuery(completeQuery(state.searchQuery, f.name)),
        }, `${f.name} (${f.count})`))));
}

function conditionWidget(actions: ExplorerActions): VNode {
  let metric = "total";
  let op = ">";
  let value = "20";
  return h("div", { class: "condition-widget" },
    h("select", {
      class: "cond-metric",
      onchange: (e?: unknown) => { metric = readValue(e) ?? metric; },
    }, SORT_METRICS.filter((m) => m !== "lexicographic").map((m) =>
      h("option", { value: m, selected: m === metric }, m))),
    h("select", {
      class: "cond-op",
      onchange: (e?: unknown) => { op = readValue(e) ?? op; },
    }, [">", ">=", "<", "<=", "=="].map((o) => h("option", { value: o, selected: o === op }, o))),
    h("input", {
      class: "cond-value", type: "number", value,
      oninput: (e?: unknown) => { value = readValue(e) ?? value; },
    }),
    h("button", {
      class: "cond-apply",
      onclick: () => actions.pushCondition(metric, op, Number(value)),
    }, "filter"));
}

function readValue(e?: unknown): string | undefined {
  return (e as { target?: { value?: string } })?.target?.value;
}

function filterStack(payload: GroupsPayload, state: ExplorerState,
                     actions: ExplorerActions): VNode {
  return h("div", { class: "filter-stack" },
    h("h4", {}, "Filtered items"),
    h("ul", {},
      payload.stack.map((entry) =>
        h("li", {
          class: "stack-entry" + (entry.depth === payload.stack.length - 1 ? " current" : ""),
          "data-depth": entry.depth,
          onclick: () => actions.popTo(entry.depth),
        },
        h("span", { class: "stack-size" }, String(entry.size)),
        h("span", { class: "stack-kind" },
          entry.filter === null ? "all items" : String(entry.filter.kind))))),
    h("button", {
      class: "stack-push", title: "filter to the selected explanations",
      disabled: state.selection.size === 0,
      onclick: () => {
        const keys = [...state.selection].map((kp) =>
          kp === "-" ? [] : kp.split(",").map(Number));
        actions.pushSelection(keys);
      },
    }, "+"));
}

function sortList(payload: GroupsPayload, actions: ExplorerActions): VNode {
  const active = payload.sort.map(([m]) => m);
  const rest = SORT_METRICS.filter((m) => !active.includes(m));
  const entries: [string, string][] = [...payload.sort, ...rest.map((m): [string, string] =>
    [m, m === "lexicographic" ? "asc" : "desc"])];
  return h("div", { class: "sort-list" },
    h("h4", {}, "Sort order"),
    h("ul", {},
      entries.map(([metric, dir], i) =>
        h("li", { class: `sort-entry${i === 0 ? " primary" : ""}`, "data-metric": metric },
          h("span", {
            class: "sort-name",
            onclick: () => actions.setSort(metric, dir as "asc" | "desc"),
          }, metric),
          h("button", {
            class: "sort-dir", "data-dir": dir,
            title: "flip direction",
            onclick: () => actions.setSort(metric, dir === "asc" ? "desc" : "asc"),
          }, dir === "asc" ? "↑" : "↓")))));
}

export function renderExplorer(payload: GroupsPayload, state: ExplorerState,
                               actions: ExplorerActions): VNode {
  const maxSize = Math.max(1, ...payload.groups.map((g) => g.size));
  const extent = oddsExtent(payload.groups.flatMap((g) => [g.or, g.ci[0], g.ci[1]]));
  const scale = logScale(extent, [6, OR_WIDTH - 6]);
  const pages = Math.max(1, Math.ceil(payload.total_groups / payload.page_size));
  return h("section", { class: "panel explorer-panel" },
    h("div", { class: "explorer-rail" },
      searchBox(state, actions),
      conditionWidget(actions),
      filterStack(payload, state, actions),
      sortList(payload, actions)),
    h("div", { class: "explorer-main" },
      h("h2", {}, `Explanations (${payload.total_groups} groups)`),
      h("table", { class: "group-table" },
        h("tr", {},
          h("th", {}, "explanation"), h("th", {}, "outcomes"), h("th", {}, "size"),
          h("th", {}, "odds ratio"), h("th", {}, "")),
        payload.groups.map((g) => groupRow(g, maxSize, scale, state, actions))),
      pages > 1 && h("div", { class: "pager" },
        h("button", {
          class: "pager-prev", disabled: payload.page === 0,
          onclick: () => actions.setPage(payload.page - 1),
        }, "prev"),
        h("span", { class: "pager-state" }, `page ${payload.page + 1} / ${pages}`),
        h("button", {
          class: "pager-next", disabled: payload.page >= pages - 1,
          onclick: () => actions.setPage(payload.page + 1),
        }, "next"))));
}
