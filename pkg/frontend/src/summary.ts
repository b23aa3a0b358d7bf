/**
 * Statistical summary panel: score histogram (bars up = predicted positive,
 * down = predicted negative, hatched = incorrect, score axis 1 -> 0 left to
 * right to mirror the confusion matrix), confusion matrix with margins, ROC
 * curve with the operating-point crosshair, AUC and accuracy readouts.
 */

import type { SummaryPayload } from "./api.js";
import { fmtScore } from "./format.js";
import { linear } from "./scale.js";
import { VNode, h } from "./vnode.js";

export interface SummaryActions {
  /** Push a score-range filter for a clicked histogram bar and open the explorer. */
  selectScoreRange(lo: number, hi: number): void;
}

const W = 560;
const H = 220;
const MID = H / 2;

function histogram(payload: SummaryPayload, actions: SummaryActions): VNode {
  const { edges, counts } = payload.histogram;
  const bins = edges.length - 1;
  // score 1 at the left, 0 at the right
  const x = linear([1, 0], [40, W - 10]);
  const up = counts.tp.map((v, i) => v + counts.fp[i]);
  const down = counts.tn.map((v, i) => v + counts.fn[i]);
  const peak = Math.max(1, ...up, ...down);
  const yUp = linear([0, peak], [0, MID - 14]);

  const bars: VNode[] = [];
  for (let i = 0; i < bins; i++) {
    const lo = edges[i];
    const hi = edges[i + 1];
    const left = Math.min(x(lo), x(hi));
    const width = Math.abs(x(hi) - x(lo)) - 1;
    const click = () => actions.selectScoreRange(lo, hi);
    const segment = (cls: string, count: number, base: number, dir: 1 | -1) => {
      if (count === 0) return;
      const hgt = yUp(count);
      bars.push(h("rect", {
        class: `hist-bar ${cls}`,
        x: left,
        y: dir === 1 ? MID - base - hgt : MID + base,
        width: Math.max(width, 1),
        height: hgt,
        "data-lo": lo,
        "data-hi": hi,
        onclick: click,
      }));
    };
    // up: predicted positive (correct = TP plain, incorrect = FP hatched)
    segment("pred-pos", counts.tp[i], 0, 1);
    segment("pred-pos hatched", counts.fp[i], yUp(counts.tp[i]), 1);
    segment("pred-neg", counts.tn[i], 0, -1);
    segment("pred-neg hatched", counts.fn[i], yUp(counts.tn[i]), -1);
  }
  const tx = x(payload.roc.threshold);
  return h("svg", { class: "histogram", width: W, height: H, viewBox: `0 0 ${W} ${H}` },
    h("line", { class: "axis", x1: 40, y1: MID, x2: W - 10, y2: MID }),
    bars,
    h("line", {
      class: "threshold-line", x1: tx, y1: 8, x2: tx, y2: H - 8,
      "data-threshold": payload.roc.threshold,
    }),
    h("text", { class: "axis-label", x: 40, y: H - 2 }, "1"),
    h("text", { class: "axis-label", x: W - 16, y: H - 2 }, "0"),
    h("text", { class: "axis-label", x: tx + 4, y: 14 }, `t=${fmtScore(payload.roc.threshold)}`),
  );
}

function confusion(payload: SummaryPayload): VNode {
  const c = payload.confusion;
  const cell = (cls: string, label: string, value: number) =>
    h("td", { class: `conf-cell ${cls}` },
      h("span", { class: "conf-label" }, label),
      h("span", { class: "conf-value" }, String(value)));
  return h("table", { class: "confusion" },
    h("tr", {},
      h("th", {}), h("th", {}, "pred +"), h("th", {}, "pred -"), h("th", {}, "Σ")),
    h("tr", {},
      h("th", {}, "truth +"),
      cell("tp pred-pos", "TP", c.tp),
      cell("fn pred-neg hatched", "FN", c.fn),
      h("td", { class: "conf-margin truth-pos-total" }, String(c.truth_positive))),
    h("tr", {},
      h("th", {}, "truth -"),
      cell("fp pred-pos hatched", "FP", c.fp),
      cell("tn pred-neg", "TN", c.tn),
      h("td", { class: "conf-margin truth-neg-total" }, String(c.truth_negative))),
    h("tr", {},
      h("th", {}, "Σ"),
      h("td", { class: "conf-margin pred-pos-total" }, String(c.predicted_positive)),
      h("td", { class: "conf-margin pred-neg-total" }, String(c.predicted_negative)),
      h("td", { class: "conf-margin conf-total" }, String(c.total))));
}

function rocPlot(payload: SummaryPayload): VNode {
  const S = 180;
  const x = linear([0, 1], [30, S - 6]);
  const y = linear([0, 1], [S - 20, 6]);
  const pts = payload.roc.points.map((p) => `${x(p[0])},${y(p[1])}`).join(" ");
  const [ofpr, otpr] = payload.roc.operating_point;
  return h("svg", { class: "roc", width: S, height: S, viewBox: `0 0 ${S} ${S}` },
    h("line", { class: "axis", x1: x(0), y1: y(0), x2: x(1), y2: y(0) }),
    h("line", { class: "axis", x1: x(0), y1: y(0), x2: x(0), y2: y(1) }),
    h("line", { class: "diagonal", x1: x(0), y1: y(0), x2: x(1), y2: y(1) }),
    h("polyline", { class: "roc-curve", points: pts, fill: "none" }),
    h("line", { class: "op-cross", x1: x(ofpr), y1: y(0), x2: x(ofpr), y2: y(1) }),
    h("line", { class: "op-cross", x1: x(0), y1: y(otpr), x2: x(1), y2: y(otpr) }),
    h("text", { class: "axis-label", x: S / 2 - 10, y: S - 4 }, "FPR"),
    h("text", { class: "axis-label", x: 2, y: 12 }, "TPR"));
}

export function renderSummary(payload: SummaryPayload, actions: SummaryActions): VNode {
  const auc = payload.roc;
  return h("section", { class: "panel summary-panel" },
    h("h2", {}, "Statistical summary"),
    h("div", { class: "summary-grid" },
      h("div", { class: "summary-block" },
        h("h3", {}, "Prediction scores"),
        histogram(payload, actions),
        h("p", { class: "hint" }, "Click a bar to inspect its score range in the explorer.")),
      h("div", { class: "summary-block" },
        h("h3", {}, "Confusion matrix"),
        confusion(payload),
        h("div", { class: "readouts" },
          h("div", { class: "readout auc-train" },
            "AUC train: ", auc.auc_train === null ? "n/a" : fmtScore(auc.auc_train)),
          h("div", { class: "readout auc-test" }, "AUC test: ", fmtScore(auc.auc_test)),
          h("div", { class: "readout accuracy" }, "Accuracy: ", fmtScore(payload.accuracy)),
          h("div", { class: "readout threshold" }, "Threshold: ", fmtScore(auc.threshold)))),
      h("div", { class: "summary-block" },
        h("h3", {}, "ROC (test)"),
        rocPlot(payload))));
}
