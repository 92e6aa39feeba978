/** Subgroup bar chart with dual encoding: bar height tracks the subgroup
 * count, fill saturation tracks the representation rate. When per-subgroup
 * model accuracy is present each group gains an adjacent linked accuracy bar
 * on its own 0..1 scale.
 */

import { el, valueSpan } from "../dom.js";
import { formatCount, formatRate } from "../format.js";

export interface BarDatum {
  label: string;
  count: number;
  rate: number;
  accuracy: number | null;
  coverageMet: boolean;
  deficit: number;
  highlighted: boolean;
}

const CHART_HEIGHT_PX = 140;

export function renderBarChart(doc: Document, data: BarDatum[]): HTMLElement {
  const chart = el(doc, "div", { className: "chart", attrs: { role: "img" } });
  const peak = Math.max(1, ...data.map((d) => d.count));

  for (const d of data) {
    const group = el(doc, "div", {
      className: d.highlighted ? "bar-group impacted" : "bar-group",
      attrs: {
        "data-label": d.label,
        "data-count": String(d.count),
        "data-rate": String(d.rate),
        "data-covered": String(d.coverageMet),
      },
    });

    const bars = el(doc, "div", { className: "bars" });
    const countBar = el(doc, "div", {
      className: "bar count-bar",
      attrs: { title: `count ${formatCount(d.count)}` },
    });
    countBar.style.height = `${Math.round((d.count / peak) * CHART_HEIGHT_PX)}px`;
    const saturation = Math.round(Math.min(1, Math.max(0, d.rate)) * 100);
    countBar.style.backgroundColor = `hsl(210, ${saturation}%, 45%)`;
    bars.append(countBar);

    if (d.accuracy != null) {
      const accBar = el(doc, "div", {
        className: "bar accuracy-bar",
        attrs: {
          title: `accuracy ${formatRate(d.accuracy)}`,
          "data-accuracy": String(d.accuracy),
        },
      });
      accBar.style.height = `${Math.round(d.accuracy * CHART_HEIGHT_PX)}px`;
      bars.append(accBar);
    }
    group.append(bars);

    group.append(el(doc, "div", { className: "bar-label", text: d.label }));

    const stats = el(doc, "div", { className: "bar-stats" });
    stats.append(valueSpan(doc, formatCount(d.count), "stat-count"));
    stats.append(doc.createTextNode(" rate "));
    stats.append(valueSpan(doc, formatRate(d.rate), "stat-rate"));
    if (d.accuracy != null) {
      stats.append(doc.createTextNode(" acc "));
      stats.append(valueSpan(doc, formatRate(d.accuracy), "stat-accuracy"));
    }
    if (!d.coverageMet) {
      stats.append(doc.createTextNode(" deficit "));
      stats.append(valueSpan(doc, formatCount(d.deficit), "stat-deficit"));
    }
    group.append(stats);

    chart.append(group);
  }
  return chart;
}
