/** Data Explorer: the bias-awareness view.
 *
 * Sections: overall measures, per-variable measures, the subgroup
 * distribution chart for the selected variable with linked accuracy bars,
 * and the most-impacted list. Every number shown here is lifted straight
 * from the server's bias report or dataset document; the client computes
 * nothing beyond formatting.
 */

import type { BarDatum } from "../components/barChart.js";
import { renderBarChart } from "../components/barChart.js";
import { clear, el, valueSpan } from "../dom.js";
import { formatCount, formatRate } from "../format.js";
import type { BiasReportDoc, DatasetDoc, SubgroupStatsDoc } from "../types.js";
import { View } from "./base.js";

export class DataExplorerView extends View {
  async render(): Promise<void> {
    const datasetId = this.state.datasetId;
    if (!datasetId) {
      clear(this.host);
      this.host.append(el(this.doc, "p", { text: "Load a dataset to begin." }));
      return;
    }
    const dataset = await this.api.getDataset(datasetId);
    const bias = await this.api.getBias(datasetId, this.state.coverageThreshold);
    if (!this.state.selectedVariable || !(this.state.selectedVariable in bias.per_variable)) {
      this.state.selectedVariable = bias.target_variable;
    }

    clear(this.host);
    this.host.append(this.overallSection(dataset, bias));
    this.host.append(this.perVariableSection(bias));
    this.host.append(this.distributionSection(bias));
    this.host.append(this.mostImpactedSection(bias));
  }

  private highlighted(s: SubgroupStatsDoc): boolean {
    return !s.coverage_met || s.representation_rate < this.state.highlightRate;
  }

  // -- overall measures ----------------------------------------------------

  private overallSection(dataset: DatasetDoc, bias: BiasReportDoc): HTMLElement {
    const doc = this.doc;
    const section = el(doc, "section", { attrs: { id: "overall" } });
    section.append(el(doc, "h2", { text: "Overall" }));

    const list = el(doc, "dl", { className: "measures" });
    const add = (label: string, value: HTMLElement) => {
      list.append(el(doc, "dt", { text: label }));
      list.append(el(doc, "dd", {}, [value]));
    };
    add("Rows", valueSpan(doc, formatCount(dataset.row_count), "overall-rows"));
    add("Accepted samples", valueSpan(doc, formatCount(dataset.accepted_count), "overall-accepted"));
    add("Dataset version", valueSpan(doc, formatCount(dataset.version), "overall-version"));
    add("Target variable", el(doc, "span", { className: "overall-target", text: bias.target_variable }));
    add(
      "Coverage threshold",
      valueSpan(doc, formatCount(bias.coverage_threshold), "overall-threshold"),
    );
    add(
      "Uncovered subgroups",
      valueSpan(doc, formatCount(bias.uncovered_subgroup_count), "overall-uncovered"),
    );
    section.append(list);

    // Threshold control: re-reads the report, which recomputes server-side.
    const controls = el(doc, "div", { className: "controls" });
    const input = el(doc, "input", {
      attrs: {
        id: "threshold-input",
        type: "number",
        min: "1",
        value: String(bias.coverage_threshold),
      },
    });
    controls.append(el(doc, "label", { text: "Coverage threshold ", attrs: { for: "threshold-input" } }));
    controls.append(input);
    controls.append(
      el(doc, "button", {
        attrs: { id: "apply-threshold" },
        text: "Apply",
        onClick: () =>
          this.act(async () => {
            const parsed = Number.parseInt(input.value, 10);
            if (!Number.isInteger(parsed) || parsed < 1) {
              this.banner.error("coverage threshold must be a positive integer");
              return;
            }
            this.state.coverageThreshold = parsed;
            await this.render();
          }),
      }),
    );

    controls.append(
      el(doc, "button", {
        attrs: { id: "train-model" },
        text: this.state.modelId ? "Retrain model" : "Train model",
        onClick: () =>
          this.act(async () => {
            const result = await this.api.trainModel(this.state.datasetId!, {});
            this.state.modelId = result.model_id;
            this.banner.info(`model ${result.model_id} trained`);
            await this.render();
          }),
      }),
    );
    if (this.state.modelId) {
      controls.append(
        el(doc, "span", { className: "model-note", text: `model: ${this.state.modelId}` }),
      );
    }
    section.append(controls);
    return section;
  }

  // -- per-variable measures -------------------------------------------------

  private perVariableSection(bias: BiasReportDoc): HTMLElement {
    const doc = this.doc;
    const section = el(doc, "section", { attrs: { id: "per-variable" } });
    section.append(el(doc, "h2", { text: "Per variable" }));

    const table = el(doc, "table", { className: "variable-table" });
    const head = el(doc, "tr");
    for (const h of ["Variable", "Min rate", "Coverage"]) {
      head.append(el(doc, "th", { text: h }));
    }
    table.append(head);

    for (const [name, stats] of Object.entries(bias.per_variable)) {
      const minRate = bias.min_rate_per_variable[name];
      const gaps = stats.some((s) => !s.coverage_met);
      const row = el(doc, "tr", {
        className: name === this.state.selectedVariable ? "variable-row selected" : "variable-row",
        attrs: { "data-variable": name },
        onClick: () =>
          this.act(async () => {
            this.state.selectedVariable = name;
            await this.render();
          }),
      });
      row.append(el(doc, "td", { text: name }));
      row.append(
        el(doc, "td", {}, [valueSpan(doc, minRate == null ? "" : formatRate(minRate), "min-rate")]),
      );
      row.append(el(doc, "td", { className: gaps ? "gaps" : "covered", text: gaps ? "coverage gaps" : "covered" }));
      table.append(row);
    }
    section.append(table);
    return section;
  }

  // -- subgroup distribution chart -------------------------------------------

  private distributionSection(bias: BiasReportDoc): HTMLElement {
    const doc = this.doc;
    const section = el(doc, "section", { attrs: { id: "distribution" } });
    const variable = this.state.selectedVariable!;
    section.append(el(doc, "h2", { text: `Subgroups of ${variable}` }));

    const select = el(doc, "select", { attrs: { id: "variable-select" } });
    for (const name of Object.keys(bias.per_variable)) {
      const option = el(doc, "option", { text: name, attrs: { value: name } });
      if (name === variable) option.setAttribute("selected", "selected");
      select.append(option);
    }
    select.addEventListener("change", () =>
      this.act(async () => {
        this.state.selectedVariable = select.value;
        await this.render();
      }),
    );
    section.append(select);

    const stats = bias.per_variable[variable] ?? [];
    const data: BarDatum[] = stats.map((s) => ({
      label: s.label,
      count: s.count,
      rate: s.representation_rate,
      accuracy: s.subgroup_accuracy,
      coverageMet: s.coverage_met,
      deficit: s.coverage_deficit,
      highlighted: this.highlighted(s),
    }));
    section.append(renderBarChart(doc, data));

    if (stats.every((s) => s.subgroup_accuracy == null)) {
      section.append(
        el(doc, "p", {
          className: "accuracy-note",
          text: "Per-subgroup accuracy appears here once a model is trained.",
        }),
      );
    }
    return section;
  }

  // -- most-impacted list -----------------------------------------------------

  private mostImpactedSection(bias: BiasReportDoc): HTMLElement {
    const doc = this.doc;
    const section = el(doc, "section", { attrs: { id: "most-impacted" } });
    section.append(el(doc, "h2", { text: "Most impacted subgroups" }));

    const list = el(doc, "ol", { className: "impacted-list" });
    let flagged = 0;
    for (const key of bias.most_impacted) {
      const stats = (bias.per_variable[key.variable] ?? []).find((s) => s.label === key.label);
      if (stats && this.highlighted(stats)) flagged += 1;
      const item = el(doc, "li", {
        className: stats && this.highlighted(stats) ? "impacted-item highlight" : "impacted-item",
        attrs: { "data-variable": key.variable, "data-label": key.label },
      });
      item.append(el(doc, "span", { className: "impacted-name", text: `${key.variable} = ${key.label}` }));
      if (stats) {
        item.append(doc.createTextNode(" rate "));
        item.append(valueSpan(doc, formatRate(stats.representation_rate), "impacted-rate"));
        if (!stats.coverage_met) {
          item.append(doc.createTextNode(" deficit "));
          item.append(valueSpan(doc, formatCount(stats.coverage_deficit), "impacted-deficit"));
        }
      }
      item.append(
        el(doc, "button", {
          className: "plan-for",
          text: "Plan augmentation",
          onClick: () =>
            this.act(async () => {
              this.prefillPlanDraft(key.variable, key.label, bias.target_variable);
              this.navigate("augment");
            }),
        }),
      );
      list.append(item);
    }
    section.append(list);
    if (!flagged) {
      section.append(el(doc, "p", { className: "impacted-empty", text: "No subgroups flagged." }));
    }
    return section;
  }

  /** Seed the plan form from an impacted subgroup: a target-variable subgroup
   * becomes the target class, a predictor subgroup becomes a set constraint. */
  private prefillPlanDraft(variable: string, label: string, target: string): void {
    const draft = this.state.planDraft;
    if (variable === target) {
      draft.targetClass = label;
    } else {
      draft.sets.set(variable, { enabled: true, allowed: new Set([label]) });
    }
  }
}
