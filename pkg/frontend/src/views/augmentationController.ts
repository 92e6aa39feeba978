/** Augmentation Controller: target class, requested count, and per-variable
 * interval or set constraints.
 *
 * Client-side validation mirrors the server's plan rules so malformed drafts
 * never leave the browser: positive integer count, lo <= hi on intervals,
 * non-empty category sets, one constraint per variable (structural), and an
 * unsigned integer seed. Creating the plan shows the eligible pool size the
 * server computed; generation is a separate click against that stored plan.
 */

import { clear, el, valueSpan } from "../dom.js";
import { formatCount } from "../format.js";
import type { ConstraintDoc, DatasetDoc, PlanDoc, VariableSchemaDoc } from "../types.js";
import { View } from "./base.js";

interface FieldError {
  field: string;
  message: string;
}

export class AugmentationControllerView extends View {
  async render(): Promise<void> {
    const datasetId = this.state.datasetId;
    if (!datasetId) {
      clear(this.host);
      this.host.append(el(this.doc, "p", { text: "Load a dataset to begin." }));
      return;
    }
    const dataset = await this.api.getDataset(datasetId);
    clear(this.host);
    this.host.append(this.planForm(dataset));
  }

  private planForm(dataset: DatasetDoc): HTMLElement {
    const doc = this.doc;
    const draft = this.state.planDraft;
    const target = dataset.schema.find((v) => v.role === "target");
    const predictors = dataset.schema.filter((v) => v.role !== "target");

    const form = el(doc, "form", { attrs: { id: "plan-form" } });
    form.addEventListener("submit", (ev) => ev.preventDefault());
    // Any edit invalidates a previously created plan so generation can never
    // run against a draft the user no longer sees.
    form.addEventListener("input", () => {
      if (this.state.planId) {
        this.state.planId = null;
        this.refreshPoolDisplay(null);
      }
    });

    const targetSection = el(doc, "fieldset", { attrs: { id: "plan-target" } });
    targetSection.append(el(doc, "legend", { text: "Target" }));

    const classSelect = el(doc, "select", { attrs: { id: "target-class" } });
    classSelect.append(el(doc, "option", { text: "choose a class", attrs: { value: "" } }));
    for (const label of target?.categories ?? []) {
      const option = el(doc, "option", { text: label, attrs: { value: label } });
      if (label === draft.targetClass) option.setAttribute("selected", "selected");
      classSelect.append(option);
    }
    classSelect.addEventListener("change", () => {
      draft.targetClass = classSelect.value;
    });
    targetSection.append(
      el(doc, "label", { text: `Class of ${target?.name ?? "target"} ` }, [classSelect]),
    );

    const countInput = el(doc, "input", {
      attrs: { id: "requested-count", type: "number", min: "1", value: draft.requestedCount },
    });
    countInput.addEventListener("input", () => {
      draft.requestedCount = countInput.value;
    });
    targetSection.append(el(doc, "label", { text: " Samples to generate " }, [countInput]));

    const seedInput = el(doc, "input", {
      attrs: { id: "plan-seed", type: "number", min: "0", value: draft.seed, placeholder: "seed" },
    });
    seedInput.addEventListener("input", () => {
      draft.seed = seedInput.value;
    });
    targetSection.append(el(doc, "label", { text: " Seed (optional) " }, [seedInput]));
    form.append(targetSection);

    const constraintSection = el(doc, "fieldset", { attrs: { id: "plan-constraints" } });
    constraintSection.append(el(doc, "legend", { text: "Constraints" }));
    for (const variable of predictors) {
      constraintSection.append(this.constraintRow(variable));
    }
    form.append(constraintSection);

    const actions = el(doc, "div", { className: "plan-actions" });
    actions.append(
      el(doc, "button", {
        attrs: { id: "create-plan", type: "button" },
        text: "Create plan",
        onClick: () => this.act(() => this.submitPlan(dataset)),
      }),
    );
    const poolNote = el(doc, "span", { attrs: { id: "pool-display" } });
    actions.append(poolNote);
    actions.append(
      el(doc, "button", {
        attrs: { id: "generate", type: "button", disabled: "disabled" },
        text: "Generate",
        onClick: () => this.act(() => this.runGeneration()),
      }),
    );
    form.append(actions);
    form.append(el(doc, "ul", { className: "field-errors", attrs: { id: "plan-errors" } }));
    return form;
  }

  private constraintRow(variable: VariableSchemaDoc): HTMLElement {
    const doc = this.doc;
    const draft = this.state.planDraft;
    const row = el(doc, "div", {
      className: "constraint-row",
      attrs: { "data-variable": variable.name },
    });

    const toggle = el(doc, "input", {
      attrs: { type: "checkbox", id: `constrain-${variable.name}` },
    });
    row.append(toggle);
    row.append(
      el(doc, "label", { text: ` ${variable.name} `, attrs: { for: `constrain-${variable.name}` } }),
    );

    if (variable.kind === "categorical") {
      const entry = draft.sets.get(variable.name) ?? { enabled: false, allowed: new Set<string>() };
      draft.sets.set(variable.name, entry);
      if (entry.enabled) toggle.setAttribute("checked", "checked");
      toggle.addEventListener("change", () => {
        entry.enabled = toggle.checked;
      });
      for (const label of variable.categories ?? []) {
        const box = el(doc, "input", {
          attrs: { type: "checkbox", "data-allowed": label },
        });
        if (entry.allowed.has(label)) box.setAttribute("checked", "checked");
        box.addEventListener("change", () => {
          if (box.checked) entry.allowed.add(label);
          else entry.allowed.delete(label);
        });
        row.append(el(doc, "label", { className: "allowed-label" }, [box, ` ${label}`]));
      }
    } else {
      const entry = draft.intervals.get(variable.name) ?? { enabled: false, lo: "", hi: "" };
      draft.intervals.set(variable.name, entry);
      if (entry.enabled) toggle.setAttribute("checked", "checked");
      toggle.addEventListener("change", () => {
        entry.enabled = toggle.checked;
      });
      const lo = el(doc, "input", {
        attrs: { type: "number", placeholder: "lo", "data-bound": "lo", value: entry.lo },
      });
      lo.addEventListener("input", () => {
        entry.lo = lo.value;
      });
      const hi = el(doc, "input", {
        attrs: { type: "number", placeholder: "hi", "data-bound": "hi", value: entry.hi },
      });
      hi.addEventListener("input", () => {
        entry.hi = hi.value;
      });
      row.append(lo);
      row.append(hi);
    }
    return row;
  }

  // -- validation mirroring the server ---------------------------------------

  private validate(dataset: DatasetDoc): { plan?: PlanDoc; errors: FieldError[] } {
    const draft = this.state.planDraft;
    const errors: FieldError[] = [];
    const target = dataset.schema.find((v) => v.role === "target");

    if (!draft.targetClass) {
      errors.push({ field: "target-class", message: "choose a target class" });
    } else if (target?.categories && !target.categories.includes(draft.targetClass)) {
      errors.push({ field: "target-class", message: "unknown target class" });
    }

    const count = Number(draft.requestedCount);
    if (!Number.isInteger(count) || count < 1) {
      errors.push({ field: "requested-count", message: "requested count must be a positive integer" });
    }

    let seed: number | undefined;
    if (draft.seed.trim() !== "") {
      seed = Number(draft.seed);
      if (!Number.isSafeInteger(seed) || seed < 0) {
        errors.push({ field: "plan-seed", message: "seed must be a non-negative integer" });
      }
    }

    const constraints: ConstraintDoc[] = [];
    for (const [name, entry] of draft.intervals) {
      if (!entry.enabled) continue;
      const lo = Number(entry.lo);
      const hi = Number(entry.hi);
      if (entry.lo.trim() === "" || entry.hi.trim() === "" || Number.isNaN(lo) || Number.isNaN(hi)) {
        errors.push({ field: name, message: `${name}: both interval bounds must be numbers` });
        continue;
      }
      if (lo > hi) {
        errors.push({ field: name, message: `${name}: interval lo ${lo} exceeds hi ${hi}` });
        continue;
      }
      constraints.push({ variable: name, interval: [lo, hi] });
    }
    for (const [name, entry] of draft.sets) {
      if (!entry.enabled) continue;
      if (entry.allowed.size === 0) {
        errors.push({ field: name, message: `${name}: select at least one label` });
        continue;
      }
      constraints.push({ variable: name, allowed: [...entry.allowed].sort() });
    }

    if (errors.length) return { errors };
    const plan: PlanDoc = {
      target_class: draft.targetClass,
      requested_count: count,
      constraints,
    };
    if (seed != null) plan.seed = seed;
    return { plan, errors };
  }

  private showErrors(errors: FieldError[]): void {
    const list = this.host.querySelector("#plan-errors");
    if (!list) return;
    clear(list as HTMLElement);
    for (const e of errors) {
      // data-derived: validation text echoes the user's draft, not API data
      list.append(
        el(this.doc, "li", {
          className: "field-error",
          text: e.message,
          attrs: { "data-field": e.field, "data-derived": "validation" },
        }),
      );
    }
  }

  private refreshPoolDisplay(poolSize: number | null): void {
    const note = this.host.querySelector("#pool-display") as HTMLElement | null;
    const generate = this.host.querySelector("#generate") as HTMLButtonElement | null;
    if (!note || !generate) return;
    clear(note);
    if (poolSize == null) {
      generate.setAttribute("disabled", "disabled");
      return;
    }
    note.append(this.doc.createTextNode("Eligible pool: "));
    note.append(valueSpan(this.doc, formatCount(poolSize), "pool-size"));
    note.append(this.doc.createTextNode(" rows"));
    generate.removeAttribute("disabled");
  }

  // -- server round trips ------------------------------------------------------

  private async submitPlan(dataset: DatasetDoc): Promise<void> {
    const { plan, errors } = this.validate(dataset);
    this.showErrors(errors);
    if (!plan) return; // invalid drafts never reach the network
    const created = await this.api.createPlan(dataset.dataset_id, plan);
    this.state.planId = created.plan_id;
    this.showErrors([]);
    this.refreshPoolDisplay(created.eligible_pool_size);
  }

  private async runGeneration(): Promise<void> {
    if (!this.state.planId) return;
    const produced = await this.api.generate(this.state.planId);
    this.state.batchId = produced.batch_id;
    this.state.batchVersion = produced.version;
    this.state.activeFilter = null;
    this.navigate("generated");
  }
}
