/**
 * Item-level inspector: a presence matrix over the selected group. The first
 * column is the outcome glyph (blue/orange, hatched when incorrect), then a
 * per-row item-count bar, then one cell per visible feature column. Column
 * headers are slanted and carry frequency bars. Rows expand to one item per
 * row and collapse back losslessly; ordering and hiding delegate to the
 * service.
 */

import type { MatrixPayload, MatrixRowPayload } from "./api.js";
import { VNode, h } from "./vnode.js";

export interface InspectorActions {
  setOrder(rows: "feature-order" | "count", cols: "importance" | "frequency" | "lexicographic"): void;
  setHide(hide: boolean): void;
  setPage(page: number): void;
  toggleExpand(rowKey: string): void;
  backToExplorer(): void;
}

export interface InspectorState {
  rowMode: "feature-order" | "count";
  colMode: "importance" | "frequency" | "lexicographic";
  hide: boolean;
  expanded: Set<string>;
  page: number;
  pageSize: number;
}

export function rowKeyOf(row: MatrixRowPayload): string {
  return `${row.outcome}:${row.active.join(",")}`;
}

/** Client-side expansion of aggregate rows into one-item rows (lossless:
 * same vector and outcome, ids partitioned one per row). */
export function visibleRows(rows: MatrixRowPayload[],
                            expanded: Set<string>): MatrixRowPayload[] {
  const out: MatrixRowPayload[] = [];
  for (const row of rows) {
    if (row.count > 1 && expanded.has(rowKeyOf(row))) {
      for (const id of row.ids) {
        out.push({ active: row.active, outcome: row.outcome, count: 1, ids: [id] });
      }
    } else {
      out.push(row);
    }
  }
  return out;
}

function headerCell(name: string, frequency: number, maxFreq: number,
                    importance: number): VNode {
  return h("th", { class: "col-header", title: `${name}: in ${frequency} items` },
    h("div", { class: "col-header-slant" },
      h("div", { class: "col-freq-bar", style: `width:${(100 * frequency) / maxFreq}%` }),
      h("span", { class: "col-name", "data-importance": importance }, name)));
}

function matrixRow(row: MatrixRowPayload, features: number[], maxCount: number,
                   expandable: boolean, expanded: boolean,
                   actions: InspectorActions): VNode {
  const have = new Set(row.active);
  const key = rowKeyOf(row);
  return h("tr", { class: "matrix-row", "data-row": key },
    h("td", { class: "row-outcome" },
      h("span", {
        class: "outcome-glyph " +
          (row.outcome === "TP" || row.outcome === "FP" ? "pred-pos" : "pred-neg") +
          (row.outcome === "FP" || row.outcome === "FN" ? " hatched" : ""),
        title: row.outcome,
      }, row.outcome)),
    h("td", { class: "row-count" },
      h("div", { class: "count-bar", style: `width:${(100 * row.count) / maxCount}%` }),
      h("span", { class: "count-text" }, String(row.count)),
      expandable && h("button", {
        class: "row-expand", title: expanded ? "collapse" : "expand",
        onclick: () => actions.toggleExpand(key),
      }, expanded ? "−" : "+")),
    features.map((f) =>
      h("td", { class: `matrix-cell${have.has(f) ? " present" : ""}`, "data-feature": f },
        have.has(f) ? "■" : "")));
}

export function renderInspector(payload: MatrixPayload, state: InspectorState,
                                actions: InspectorActions): VNode {
  const columns = payload.columns.filter((c) => !c.hidden);
  const hiddenCount = payload.columns.length - columns.length;
  const features = columns.map((c) => c.feature);
  const maxFreq = Math.max(1, ...columns.map((c) => c.frequency));
  const rows = visibleRows(payload.rows, state.expanded);
  const maxCount = Math.max(1, ...rows.map((r) => r.count));
  return h("section", { class: "panel inspector-panel" },
    h("div", { class: "inspector-toolbar" },
      h("button", { class: "back-link", onclick: () => actions.backToExplorer() },
        "← explorer"),
      h("h2", {}, `Items for [${payload.group.key.join(", ") || "empty"}]`,
        h("span", { class: "group-size-note" }, ` ${payload.group.size} items`)),
      h("label", {}, "rows ",
        h("select", {
          class: "row-mode",
          onchange: (e?: unknown) => actions.setOrder(
            readValue(e) as InspectorState["rowMode"] ?? state.rowMode, state.colMode),
        },
          h("option", { value: "feature-order", selected: state.rowMode === "feature-order" },
            "feature order"),
          h("option", { value: "count", selected: state.rowMode === "count" }, "count"))),
      h("label", {}, "columns ",
        h("select", {
          class: "col-mode",
          onchange: (e?: unknown) => actions.setOrder(
            state.rowMode, readValue(e) as InspectorState["colMode"] ?? state.colMode),
        },
          h("option", { value: "importance", selected: state.colMode === "importance" },
            "importance"),
          h("option", { value: "frequency", selected: state.colMode === "frequency" },
            "frequency"),
          h("option", { value: "lexicographic", selected: state.colMode === "lexicographic" },
            "name"))),
      h("label", { class: "hide-toggle" },
        h("input", {
          type: "checkbox", class: "hide-box", checked: state.hide,
          onchange: () => actions.setHide(!state.hide),
        }),
        " hide non-discriminative",
        hiddenCount > 0 && h("span", { class: "hidden-note" }, ` (${hiddenCount} hidden)`))),
    h("table", { class: "item-matrix" },
      h("tr", { class: "matrix-head" },
        h("th", {}, "outcome"), h("th", {}, "count"),
        columns.map((c) => headerCell(c.name, c.frequency, maxFreq, c.importance))),
      rows.map((r) => {
        const expandable = r.count > 1 || state.expanded.has(rowKeyOf(r));
        return matrixRow(r, features, maxCount, expandable,
                         state.expanded.has(rowKeyOf(r)), actions);
      })),
    payload.total_rows > payload.rows.length &&
      h("div", { class: "pager" },
        h("span", { class: "pager-state" },
          `rows ${state.page * state.pageSize + 1}-` +
          `${state.page * state.pageSize + payload.rows.length}` +
          ` of ${payload.total_rows}`),
        h("button", {
          class: "pager-prev", disabled: state.page === 0,
          onclick: () => actions.setPage(state.page - 1),
        }, "prev"),
        h("button", {
          class: "pager-next",
          disabled: (state.page + 1) * state.pageSize >= payload.total_rows,
          onclick: () => actions.setPage(state.page + 1),
        }, "next")));
}

function readValue(e?: unknown): string | undefined {
  return (e as { target?: { value?: string } })?.target?.value;
}
