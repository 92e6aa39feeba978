/** Shared notice area above the views.
 *
 * Server errors appear with their code verbatim next to a readable message.
 * A stale-version conflict gets a dedicated prompt whose only affordance is
 * reloading the batch; the client never retries the rejected mutation.
 */

import type { ApiError } from "../api.js";
import { clear, el } from "../dom.js";

export class Banner {
  constructor(private readonly host: HTMLElement) {}

  private get doc(): Document {
    return this.host.ownerDocument;
  }

  info(message: string): void {
    this.show("banner-info", message);
  }

  apiError(err: ApiError): void {
    clear(this.host);
    const box = el(this.doc, "div", { className: "banner banner-error", attrs: { role: "alert" } });
    box.append(el(this.doc, "code", { className: "error-code", text: err.code }));
    box.append(el(this.doc, "span", { className: "error-message", text: ` ${err.message}` }));
    this.host.append(box);
  }

  error(message: string): void {
    this.show("banner-error", message);
  }

  staleVersion(err: ApiError, onReload: () => void): void {
    clear(this.host);
    const box = el(this.doc, "div", {
      className: "banner banner-stale",
      attrs: { role: "alert", "data-stale": "true" },
    });
    box.append(el(this.doc, "code", { className: "error-code", text: err.code }));
    box.append(
      el(this.doc, "span", {
        className: "error-message",
        text: " Someone else changed this batch. Reload it to continue; your last action was not applied.",
      }),
    );
    box.append(
      el(this.doc, "button", {
        className: "reload-batch",
        text: "Reload batch",
        onClick: () => onReload(),
      }),
    );
    this.host.append(box);
  }

  clearAll(): void {
    clear(this.host);
  }

  private show(kind: string, message: string): void {
    clear(this.host);
    this.host.append(
      el(this.doc, "div", { className: `banner ${kind}`, text: message, attrs: { role: "status" } }),
    );
  }
}
