/** Test harness: a recording fetch for intercept-and-compare assertions,
 * a DOM factory, and the numeric sweep that proves every rendered number
 * is the image of an API response value.
 */

import { JSDOM } from "jsdom";
import { ApiClient } from "../../src/api.js";
import { App } from "../../src/main.js";

export interface RecordedCall {
  method: string;
  url: string;
  path: string;
  requestBody: unknown;
  status: number;
  responseJson?: unknown;
  responseText?: string;
}

export class Recorder {
  calls: RecordedCall[] = [];
  /** Accumulated over the app's whole lifetime: reset() scopes the call list
   * for per-click assertions, but the screen may legitimately keep showing
   * values from responses received before the reset. */
  private readonly images = new Set<string>();

  readonly fetchImpl = async (input: string, init?: RequestInit): Promise<Response> => {
    const response = await fetch(input, init);
    const entry: RecordedCall = {
      method: (init?.method ?? "GET").toUpperCase(),
      url: input,
      path: new URL(input).pathname,
      requestBody: parseBody(init?.body),
      status: response.status,
    };
    const copy = response.clone();
    const contentType = response.headers.get("content-type") ?? "";
    if (contentType.includes("json")) {
      entry.responseJson = await copy.json().catch(() => undefined);
    } else {
      entry.responseText = await copy.text().catch(() => undefined);
    }
    this.calls.push(entry);
    collectNumbers(entry.responseJson, this.images);
    return response;
  };

  reset(): void {
    this.calls = [];
  }

  mutations(): RecordedCall[] {
    return this.calls.filter((c) => c.method !== "GET");
  }

  /** Every string a view is allowed to render as a number: each numeric leaf
   * of each response received so far, verbatim or at two decimals, plus the
   * numeric tokens of string leaves (labels such as interval bins embed
   * numbers that views echo verbatim). */
  allowedNumericImages(): Set<string> {
    return this.images;
  }
}

function collectNumbers(node: unknown, out: Set<string>): void {
  if (typeof node === "number") {
    out.add(String(node));
    out.add(node.toFixed(2));
    return;
  }
  if (typeof node === "string") {
    for (const match of node.matchAll(NUMBER_RE)) {
      out.add(match[0].replace(/^\+/, ""));
    }
    return;
  }
  if (Array.isArray(node)) {
    for (const item of node) collectNumbers(item, out);
    return;
  }
  if (node && typeof node === "object") {
    for (const value of Object.values(node)) collectNumbers(value, out);
  }
}

function parseBody(body: BodyInit | null | undefined): unknown {
  if (typeof body !== "string") return undefined;
  try {
    return JSON.parse(body);
  } catch {
    return undefined;
  }
}

// -- DOM ---------------------------------------------------------------------

export function newDom(): { window: Window & typeof globalThis; document: Document } {
  const dom = new JSDOM("<!doctype html><html><body><div id='app'></div></body></html>", {
    url: "http://localhost/",
  });
  return { window: dom.window as unknown as Window & typeof globalThis, document: dom.window.document };
}

export function newApp(base: string, recorder: Recorder): { app: App; document: Document } {
  const { document } = newDom();
  const api = new ApiClient(base, recorder.fetchImpl);
  const root = document.getElementById("app") as HTMLElement;
  const app = new App(api, root);
  app.show("upload");
  return { app, document };
}

// -- numeric sweep -------------------------------------------------------------

const NUMBER_RE = /(?<![\w.+-])[+-]?\d+(?:\.\d+)?(?![\w.-])/g;

const SKIPPED_TAGS = new Set(["INPUT", "SELECT", "OPTION", "BUTTON", "SCRIPT", "STYLE"]);

/** Numeric tokens a user can read in the view, excluding form controls and
 * elements explicitly marked as derived presentations of server numbers. */
export function displayedNumbers(root: Element): string[] {
  const out: string[] = [];
  const visit = (node: Node): void => {
    if (node.nodeType === 1) {
      const element = node as Element;
      if (element.hasAttribute("data-derived")) return;
      if (SKIPPED_TAGS.has(element.tagName)) return;
      element.childNodes.forEach(visit);
      return;
    }
    if (node.nodeType === 3) {
      for (const match of (node.textContent ?? "").matchAll(NUMBER_RE)) {
        out.push(match[0].replace(/^\+/, ""));
      }
    }
  };
  visit(root);
  return out;
}

/** Assert helper: every displayed number must be the image of a recorded
 * API value. Returns the offending tokens, empty when the invariant holds. */
export function unexplainedNumbers(root: Element, recorder: Recorder): string[] {
  const allowed = recorder.allowedNumericImages();
  return displayedNumbers(root).filter((token) => !allowed.has(token));
}

// -- event helpers ---------------------------------------------------------------

export function setInput(document: Document, selector: string, value: string): void {
  const input = document.querySelector(selector) as HTMLInputElement | null;
  if (!input) throw new Error(`no input matches ${selector}`);
  input.value = value;
  input.dispatchEvent(new (document.defaultView as any).Event("input", { bubbles: true }));
}

export function setSelect(document: Document, selector: string, value: string): void {
  const select = document.querySelector(selector) as HTMLSelectElement | null;
  if (!select) throw new Error(`no select matches ${selector}`);
  select.value = value;
  select.dispatchEvent(new (document.defaultView as any).Event("change", { bubbles: true }));
}

export function click(document: Document, selector: string): void {
  const target = document.querySelector(selector) as HTMLElement | null;
  if (!target) throw new Error(`nothing matches ${selector}`);
  target.click();
}

export function textOf(document: Document, selector: string): string {
  const target = document.querySelector(selector);
  if (!target) throw new Error(`nothing matches ${selector}`);
  return target.textContent ?? "";
}
