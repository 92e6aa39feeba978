/** Generated Data Explorer: the curation view over one generated batch.
 *
 * A filterable sample table with remove and accept actions, an annotate
 * control that marks low-confidence samples, and a what-if panel showing the
 * model's old and new prediction side by side for hypothetical edits.
 *
 * Every mutation sends the last seen batch version; a STALE_VERSION reply
 * surfaces as a reload prompt and the action is never retried silently.
 */

import { clear, el, valueSpan } from "../dom.js";
import { formatCount, formatDelta, formatRate, formatValue } from "../format.js";
import type {
  BatchDoc,
  ConstraintDoc,
  DatasetDoc,
  EditEntry,
  FilterPredicateDoc,
  SampleDoc,
  VariableSchemaDoc,
  WhatIfDoc,
} from "../types.js";
import { View } from "./base.js";

const REVIEWABLE = new Set(["pending", "modified"]);

export class GeneratedExplorerView extends View {
  private batch: BatchDoc | null = null;
  private dataset: DatasetDoc | null = null;

  async render(): Promise<void> {
    const batchId = this.state.batchId;
    if (!batchId || !this.state.datasetId) {
      clear(this.host);
      this.host.append(el(this.doc, "p", { text: "Generate a batch to review it here." }));
      return;
    }
    this.dataset = await this.api.getDataset(this.state.datasetId);
    this.batch = await this.api.getBatch(batchId);
    this.state.batchVersion = this.batch.version;

    clear(this.host);
    this.host.append(this.summarySection(this.batch));
    this.host.append(this.annotateSection());
    this.host.append(this.filterSection());
    this.host.append(this.tableSection(this.batch));
    this.host.append(el(this.doc, "div", { attrs: { id: "whatif-panel" } }));
    if (this.state.whatIfDraft.sampleId) {
      this.openWhatIf(this.state.whatIfDraft.sampleId);
    }
  }

  protected override async onStaleReload(): Promise<void> {
    this.state.whatIfDraft = { sampleId: null, edits: new Map() };
    await this.render();
  }

  // -- summary ----------------------------------------------------------------

  private summarySection(batch: BatchDoc): HTMLElement {
    const doc = this.doc;
    const section = el(doc, "section", { attrs: { id: "batch-summary" } });
    section.append(el(doc, "h2", { text: `Batch ${batch.id}` }));
    const line = el(doc, "p", { className: "batch-line" });
    line.append(doc.createTextNode("Produced "));
    line.append(valueSpan(doc, formatCount(batch.produced_count), "batch-produced"));
    line.append(doc.createTextNode(" samples for target class "));
    line.append(el(doc, "strong", { text: batch.plan.target_class }));
    line.append(doc.createTextNode(" in "));
    line.append(valueSpan(doc, formatCount(batch.attempts_used), "batch-attempts"));
    line.append(doc.createTextNode(" attempts. Batch version "));
    line.append(valueSpan(doc, formatCount(batch.version), "batch-version"));
    line.append(doc.createTextNode("."));
    section.append(line);
    return section;
  }

  // -- annotate (flags low-confidence samples) ---------------------------------

  private annotateSection(): HTMLElement {
    const doc = this.doc;
    const section = el(doc, "section", { attrs: { id: "annotate-controls" } });
    const threshold = el(doc, "input", {
      attrs: { id: "confidence-threshold", type: "number", step: "0.05", min: "0", max: "1", value: "0.6" },
    });
    section.append(el(doc, "label", { text: "Confidence threshold " }, [threshold]));
    section.append(
      el(doc, "button", {
        attrs: { id: "annotate", type: "button" },
        text: "Annotate with model",
        onClick: () =>
          this.act(async () => {
            if (!this.state.modelId) {
              this.banner.error("train a model in the Data Explorer first");
              return;
            }
            const value = Number(threshold.value);
            if (Number.isNaN(value) || value < 0 || value > 1) {
              this.banner.error("confidence threshold must lie in [0, 1]");
              return;
            }
            const summary = await this.api.annotate(this.state.batchId!, {
              model_id: this.state.modelId,
              confidence_threshold: value,
              expected_version: this.state.batchVersion ?? undefined,
            });
            this.state.batchVersion = summary.version;
            this.banner.info(`flagged ${summary.flagged_count} low-confidence samples`);
            await this.render();
          }),
      }),
    );
    return section;
  }

  // -- filter -------------------------------------------------------------------

  private filterSection(): HTMLElement {
    const doc = this.doc;
    const draft = this.state.filterDraft;
    const section = el(doc, "section", { attrs: { id: "filter-controls" } });

    const variableSelect = el(doc, "select", { attrs: { id: "filter-variable" } });
    variableSelect.append(el(doc, "option", { text: "any variable", attrs: { value: "" } }));
    for (const v of this.dataset?.schema ?? []) {
      const option = el(doc, "option", { text: v.name, attrs: { value: v.name } });
      if (v.name === draft.variable) option.setAttribute("selected", "selected");
      variableSelect.append(option);
    }
    const valueInputs = el(doc, "span", { attrs: { id: "filter-value-inputs" } });
    const renderValueInputs = () => {
      clear(valueInputs);
      const schema = this.dataset?.schema.find((v) => v.name === draft.variable);
      if (!schema) return;
      if (schema.kind === "categorical") {
        for (const label of schema.categories ?? []) {
          const box = el(doc, "input", { attrs: { type: "checkbox", "data-filter-allowed": label } });
          if (draft.allowed.has(label)) box.setAttribute("checked", "checked");
          box.addEventListener("change", () => {
            if (box.checked) draft.allowed.add(label);
            else draft.allowed.delete(label);
          });
          valueInputs.append(el(doc, "label", { className: "allowed-label" }, [box, ` ${label}`]));
        }
      } else {
        const lo = el(doc, "input", {
          attrs: { type: "number", placeholder: "lo", "data-filter-bound": "lo", value: draft.lo },
        });
        lo.addEventListener("input", () => {
          draft.lo = lo.value;
        });
        const hi = el(doc, "input", {
          attrs: { type: "number", placeholder: "hi", "data-filter-bound": "hi", value: draft.hi },
        });
        hi.addEventListener("input", () => {
          draft.hi = hi.value;
        });
        valueInputs.append(lo);
        valueInputs.append(hi);
      }
    };
    variableSelect.addEventListener("change", () => {
      draft.variable = variableSelect.value;
      draft.allowed.clear();
      draft.lo = "";
      draft.hi = "";
      renderValueInputs();
    });
    renderValueInputs();
    section.append(variableSelect);
    section.append(valueInputs);

    const comparator = el(doc, "select", { attrs: { id: "filter-comparator" } });
    for (const op of ["<", "<=", ">", ">=", "=="]) {
      const option = el(doc, "option", { text: op, attrs: { value: op } });
      if (op === draft.confidenceComparator) option.setAttribute("selected", "selected");
      comparator.append(option);
    }
    comparator.addEventListener("change", () => {
      draft.confidenceComparator = comparator.value;
    });
    const confidenceInput = el(doc, "input", {
      attrs: {
        id: "filter-confidence",
        type: "number",
        step: "0.05",
        min: "0",
        max: "1",
        placeholder: "confidence",
        value: draft.confidenceThreshold,
      },
    });
    confidenceInput.addEventListener("input", () => {
      draft.confidenceThreshold = confidenceInput.value;
    });
    section.append(el(doc, "label", { text: " confidence " }, [comparator, confidenceInput]));

    const predictedInput = el(doc, "input", {
      attrs: { id: "filter-predicted", type: "text", placeholder: "predicted class", value: draft.predictedClass },
    });
    predictedInput.addEventListener("input", () => {
      draft.predictedClass = predictedInput.value;
    });
    section.append(el(doc, "label", { text: " predicted class " }, [predictedInput]));

    section.append(
      el(doc, "button", {
        attrs: { id: "apply-filter", type: "button" },
        text: "Apply filter",
        onClick: () => this.act(() => this.applyFilter()),
      }),
    );
    section.append(
      el(doc, "button", {
        attrs: { id: "clear-filter", type: "button" },
        text: "Clear",
        onClick: () =>
          this.act(async () => {
            this.state.activeFilter = null;
            await this.render();
          }),
      }),
    );
    section.append(el(doc, "span", { className: "filter-errors", attrs: { id: "filter-errors" } }));
    if (this.state.activeFilter) {
      section.append(
        el(doc, "span", { className: "filter-note", attrs: { id: "filter-note" }, text: " filter active" }),
      );
    }
    return section;
  }

  private buildPredicate(): { predicate?: FilterPredicateDoc; error?: string } {
    const draft = this.state.filterDraft;
    const predicate: FilterPredicateDoc = {};
    const constraints: ConstraintDoc[] = [];

    if (draft.variable) {
      const schema = this.dataset?.schema.find((v) => v.name === draft.variable);
      if (schema?.kind === "categorical") {
        if (draft.allowed.size === 0) {
          return { error: `${draft.variable}: select at least one label` };
        }
        constraints.push({ variable: draft.variable, allowed: [...draft.allowed].sort() });
      } else {
        const lo = Number(draft.lo);
        const hi = Number(draft.hi);
        if (draft.lo.trim() === "" || draft.hi.trim() === "" || Number.isNaN(lo) || Number.isNaN(hi)) {
          return { error: `${draft.variable}: both interval bounds must be numbers` };
        }
        if (lo > hi) {
          return { error: `${draft.variable}: interval lo ${lo} exceeds hi ${hi}` };
        }
        constraints.push({ variable: draft.variable, interval: [lo, hi] });
      }
    }
    if (constraints.length) predicate.constraints = constraints;

    if (draft.confidenceThreshold.trim() !== "") {
      const threshold = Number(draft.confidenceThreshold);
      if (Number.isNaN(threshold) || threshold < 0 || threshold > 1) {
        return { error: "confidence threshold must lie in [0, 1]" };
      }
      predicate.confidence = { comparator: draft.confidenceComparator, threshold };
    }
    if (draft.predictedClass.trim() !== "") {
      predicate.predicted_class = draft.predictedClass.trim();
    }

    if (!predicate.constraints && !predicate.confidence && !predicate.predicted_class) {
      return { error: "filter needs at least one clause" };
    }
    return { predicate };
  }

  private async applyFilter(): Promise<void> {
    const errorHost = this.host.querySelector("#filter-errors") as HTMLElement | null;
    if (errorHost) clear(errorHost);
    const { predicate, error } = this.buildPredicate();
    if (!predicate) {
      if (errorHost) {
        errorHost.append(
          el(this.doc, "span", {
            className: "field-error",
            text: error ?? "invalid filter",
            attrs: { "data-derived": "validation" },
          }),
        );
      }
      return; // invalid drafts never reach the network
    }
    const result = await this.api.filterBatch(this.state.batchId!, predicate);
    this.state.activeFilter = { predicate, matching: result.matching };
    await this.render();
  }

  // -- table ---------------------------------------------------------------------

  private visibleSamples(batch: BatchDoc): SampleDoc[] {
    const filter = this.state.activeFilter;
    if (!filter) return batch.samples;
    const allowed = new Set(filter.matching);
    return batch.samples.filter((s) => allowed.has(s.id));
  }

  private tableSection(batch: BatchDoc): HTMLElement {
    const doc = this.doc;
    const section = el(doc, "section", { attrs: { id: "sample-table" } });

    const actions = el(doc, "div", { className: "table-actions" });
    actions.append(
      el(doc, "button", {
        attrs: { id: "remove-selected", type: "button" },
        text: "Remove selected",
        onClick: () =>
          this.act(async () => {
            const ids = this.selectedIds();
            if (!ids.length) {
              this.banner.error("select at least one sample");
              return;
            }
            const result = await this.api.removeSamples(
              this.state.batchId!,
              ids,
              this.state.batchVersion ?? undefined,
            );
            this.state.batchVersion = result.version;
            this.banner.info(`removed ${result.removed_count} samples`);
            await this.render();
          }),
      }),
    );
    actions.append(
      el(doc, "button", {
        attrs: { id: "accept-selected", type: "button" },
        text: "Accept selected into dataset",
        onClick: () =>
          this.act(async () => {
            const ids = this.selectedIds();
            if (!ids.length) {
              this.banner.error("select at least one sample");
              return;
            }
            const result = await this.api.acceptSamples(
              this.state.batchId!,
              ids,
              this.state.batchVersion ?? undefined,
            );
            this.state.batchVersion = result.version;
            this.banner.info(
              `accepted ${result.accepted_count} samples; dataset now has ${result.row_count} rows`,
            );
            this.navigate("data");
          }),
      }),
    );
    section.append(actions);

    const table = el(doc, "table", { className: "samples" });
    const head = el(doc, "tr");
    head.append(el(doc, "th"));
    head.append(el(doc, "th", { text: "sample" }));
    for (const v of this.dataset?.schema ?? []) {
      head.append(el(doc, "th", { text: v.name }));
    }
    for (const h of ["status", "prediction", "confidence", "flag", ""]) {
      head.append(el(doc, "th", { text: h }));
    }
    table.append(head);

    for (const sample of this.visibleSamples(batch)) {
      table.append(this.sampleRow(sample));
    }
    section.append(table);
    return section;
  }

  private sampleRow(sample: SampleDoc): HTMLElement {
    const doc = this.doc;
    const row = el(doc, "tr", {
      className: `sample-row status-${sample.status}` + (sample.problematic ? " problematic" : ""),
      attrs: { "data-sample-id": sample.id, "data-status": sample.status },
    });

    const checkboxCell = el(doc, "td");
    const checkbox = el(doc, "input", { attrs: { type: "checkbox", "data-select": sample.id } });
    if (!REVIEWABLE.has(sample.status)) checkbox.setAttribute("disabled", "disabled");
    checkboxCell.append(checkbox);
    row.append(checkboxCell);

    const shortId = sample.id.slice(sample.id.lastIndexOf("-") + 1);
    row.append(el(doc, "td", { className: "sample-id", text: shortId }));

    for (const v of this.dataset?.schema ?? []) {
      const value = sample.values[v.name];
      row.append(
        el(doc, "td", {}, [
          valueSpan(doc, value == null ? "" : formatValue(value), "cell-value"),
        ]),
      );
    }

    row.append(el(doc, "td", { className: "status", text: sample.status }));
    row.append(
      el(doc, "td", { className: "prediction", text: sample.prediction?.label ?? "" }),
    );
    const confidenceCell = el(doc, "td", { className: "confidence" });
    if (sample.prediction) {
      confidenceCell.append(valueSpan(doc, formatRate(sample.prediction.confidence), "cell-confidence"));
    }
    row.append(confidenceCell);
    row.append(
      el(doc, "td", {
        className: "flag",
        text: sample.problematic ? "low confidence" : "",
      }),
    );

    const buttonCell = el(doc, "td");
    buttonCell.append(
      el(doc, "button", {
        className: "whatif-open",
        text: "What-if",
        attrs: { type: "button", "data-whatif": sample.id },
        onClick: () =>
          this.act(async () => {
            this.openWhatIf(sample.id);
          }),
      }),
    );
    row.append(buttonCell);
    return row;
  }

  private selectedIds(): string[] {
    return [...this.host.querySelectorAll("input[data-select]")]
      .filter((box) => (box as HTMLInputElement).checked)
      .map((box) => box.getAttribute("data-select")!)
      .filter(Boolean);
  }

  // -- what-if panel -----------------------------------------------------------

  private openWhatIf(sampleId: string): void {
    const sample = this.batch?.samples.find((s) => s.id === sampleId);
    const panel = this.host.querySelector("#whatif-panel") as HTMLElement | null;
    if (!sample || !panel) return;
    const doc = this.doc;
    const draft = this.state.whatIfDraft;
    if (draft.sampleId !== sampleId) {
      draft.sampleId = sampleId;
      draft.edits = new Map();
    }

    clear(panel);
    panel.append(el(doc, "h2", { text: `What-if for ${sampleId}` }));

    const fields = el(doc, "div", { className: "whatif-fields" });
    for (const v of this.dataset?.schema ?? []) {
      const current = sample.values[v.name];
      const stored = draft.edits.get(v.name) ?? String(current ?? "");
      let input: HTMLElement;
      if (v.kind === "categorical") {
        const select = el(doc, "select", { attrs: { "data-edit": v.name } });
        for (const label of v.categories ?? []) {
          const option = el(doc, "option", { text: label, attrs: { value: label } });
          if (label === stored) option.setAttribute("selected", "selected");
          select.append(option);
        }
        select.addEventListener("change", () => draft.edits.set(v.name, select.value));
        input = select;
      } else {
        const numberInput = el(doc, "input", {
          attrs: { type: "number", "data-edit": v.name, value: stored },
        });
        numberInput.addEventListener("input", () => draft.edits.set(v.name, numberInput.value));
        input = numberInput;
      }
      fields.append(el(doc, "label", { className: "whatif-field", text: `${v.name} ` }, [input]));
    }
    panel.append(fields);

    const errorHost = el(doc, "span", { className: "field-error-slot", attrs: { id: "whatif-errors" } });
    const resultHost = el(doc, "div", { attrs: { id: "whatif-result" } });

    panel.append(
      el(doc, "button", {
        attrs: { id: "whatif-preview", type: "button" },
        text: "Preview prediction",
        onClick: () =>
          this.act(async () => {
            clear(errorHost);
            if (!this.state.modelId) {
              this.banner.error("train a model in the Data Explorer first");
              return;
            }
            const { edits, error } = this.changedEdits(sample);
            if (error) {
              errorHost.append(
                el(doc, "span", {
                  className: "field-error",
                  text: error,
                  attrs: { "data-derived": "validation" },
                }),
              );
              return;
            }
            const result = await this.api.whatIf(
              this.state.batchId!,
              sampleId,
              edits,
              this.state.modelId,
            );
            this.renderWhatIfResult(resultHost, result);
          }),
      }),
    );
    panel.append(
      el(doc, "button", {
        attrs: { id: "whatif-apply", type: "button" },
        text: "Apply edit",
        onClick: () =>
          this.act(async () => {
            clear(errorHost);
            const { edits, error } = this.changedEdits(sample);
            if (error) {
              errorHost.append(
                el(doc, "span", {
                  className: "field-error",
                  text: error,
                  attrs: { "data-derived": "validation" },
                }),
              );
              return;
            }
            if (!edits.length) {
              errorHost.append(
                el(doc, "span", {
                  className: "field-error",
                  text: "no changes to apply",
                  attrs: { "data-derived": "validation" },
                }),
              );
              return;
            }
            const result = await this.api.editSample(
              this.state.batchId!,
              sampleId,
              edits,
              this.state.batchVersion ?? undefined,
            );
            this.state.batchVersion = result.version;
            this.state.whatIfDraft = { sampleId: null, edits: new Map() };
            this.banner.info(`sample ${result.sample_id} is now ${result.status}`);
            await this.render();
          }),
      }),
    );
    panel.append(
      el(doc, "button", {
        attrs: { id: "whatif-close", type: "button" },
        text: "Close",
        onClick: () =>
          this.act(async () => {
            this.state.whatIfDraft = { sampleId: null, edits: new Map() };
            clear(panel);
          }),
      }),
    );
    panel.append(errorHost);
    panel.append(resultHost);
  }

  /** Edits whose drafted value differs from the sample's current value.
   * An untouched form yields an empty list, which the server answers with
   * two identical predictions. */
  private changedEdits(sample: SampleDoc): { edits: EditEntry[]; error?: string } {
    const edits: EditEntry[] = [];
    for (const v of this.dataset?.schema ?? []) {
      const drafted = this.state.whatIfDraft.edits.get(v.name);
      if (drafted == null) continue;
      const current = sample.values[v.name];
      if (v.kind === "categorical") {
        if (drafted !== String(current)) edits.push({ variable: v.name, value: drafted });
        continue;
      }
      if (drafted.trim() === "") continue;
      const parsed = Number(drafted);
      if (Number.isNaN(parsed)) {
        return { edits: [], error: `${v.name}: numeric value required` };
      }
      if (v.kind === "numeric-integer" && !Number.isInteger(parsed)) {
        return { edits: [], error: `${v.name}: integer value required` };
      }
      if (parsed !== Number(current)) edits.push({ variable: v.name, value: parsed });
    }
    return { edits };
  }

  private renderWhatIfResult(host: HTMLElement, result: WhatIfDoc): void {
    const doc = this.doc;
    clear(host);

    const old = el(doc, "p", { className: "whatif-old" });
    old.append(doc.createTextNode("Current prediction: "));
    old.append(el(doc, "strong", { className: "old-label", text: result.old_prediction.label }));
    old.append(doc.createTextNode(" confidence "));
    old.append(valueSpan(doc, formatRate(result.old_prediction.confidence), "old-confidence"));
    host.append(old);

    const fresh = el(doc, "p", { className: "whatif-new" });
    fresh.append(doc.createTextNode("With edits: "));
    fresh.append(el(doc, "strong", { className: "new-label", text: result.new_prediction.label }));
    fresh.append(doc.createTextNode(" confidence "));
    fresh.append(valueSpan(doc, formatRate(result.new_prediction.confidence), "new-confidence"));
    fresh.append(doc.createTextNode(" ("));
    fresh.append(
      valueSpan(
        doc,
        formatDelta(result.new_prediction.confidence, result.old_prediction.confidence),
        "confidence-delta",
        "confidence-delta",
      ),
    );
    fresh.append(doc.createTextNode(")"));
    host.append(fresh);
  }
}
