/** Application shell: navigation across the three views plus the upload
 * screen, a shared banner, and construction of the API client from the
 * single base-URL setting.
 */

import { ApiClient } from "./api.js";
import { Banner } from "./components/banner.js";
import { resolveBaseUrl } from "./config.js";
import { clear, el } from "./dom.js";
import type { ViewName, ViewState } from "./state.js";
import { initialState } from "./state.js";
import { View } from "./views/base.js";
import { AugmentationControllerView } from "./views/augmentationController.js";
import { DataExplorerView } from "./views/dataExplorer.js";
import { GeneratedExplorerView } from "./views/generatedExplorer.js";

export class App {
  readonly state: ViewState = initialState();
  readonly banner: Banner;
  private readonly views: Record<Exclude<ViewName, "upload">, View>;
  private active: ViewName = "upload";
  private pending: Promise<void> = Promise.resolve();

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
  ) {
    const doc = root.ownerDocument;
    clear(root);

    const nav = el(doc, "nav", { className: "tabs" });
    const bannerHost = el(doc, "div", { attrs: { id: "banner" } });
    const viewHost = el(doc, "main", { attrs: { id: "view" } });
    root.append(nav, bannerHost, viewHost);

    this.banner = new Banner(bannerHost);
    const navigate = (view: ViewName) => this.show(view);
    this.views = {
      data: new DataExplorerView(api, this.state, viewHost, this.banner, navigate),
      augment: new AugmentationControllerView(api, this.state, viewHost, this.banner, navigate),
      generated: new GeneratedExplorerView(api, this.state, viewHost, this.banner, navigate),
    };

    for (const [name, label] of [
      ["upload", "Load dataset"],
      ["data", "Data Explorer"],
      ["augment", "Augmentation Controller"],
      ["generated", "Generated Data"],
    ] as [ViewName, string][]) {
      nav.append(
        el(doc, "button", {
          className: "tab",
          text: label,
          attrs: { "data-view": name, type: "button" },
          onClick: () => this.show(name),
        }),
      );
    }
  }

  get viewHost(): HTMLElement {
    return this.root.querySelector("#view") as HTMLElement;
  }

  currentView(): View | null {
    return this.active === "upload" ? null : this.views[this.active];
  }

  view(name: Exclude<ViewName, "upload">): View {
    return this.views[name];
  }

  show(view: ViewName): void {
    this.active = view;
    this.banner.clearAll();
    for (const tab of this.root.querySelectorAll(".tab")) {
      tab.classList.toggle("active", tab.getAttribute("data-view") === view);
    }
    if (view === "upload") {
      this.renderUpload();
      return;
    }
    const target = this.views[view];
    this.pending = this.pending.then(() =>
      target.render().catch((err) => this.banner.error(String(err))),
    );
  }

  /** Wait until navigation renders and view handlers stop scheduling work.
   * A handler may navigate mid-flight (queueing a fresh render), so loop
   * until a full pass settles without new work appearing. */
  async idle(): Promise<void> {
    for (;;) {
      const snapshot = this.pending;
      await snapshot;
      const view = this.currentView();
      if (view) await view.idle();
      if (this.pending === snapshot) return;
    }
  }

  // -- upload screen ------------------------------------------------------------

  private renderUpload(): void {
    const doc = this.root.ownerDocument;
    const host = this.viewHost;
    clear(host);
    host.append(el(doc, "h2", { text: "Load a dataset" }));
    host.append(
      el(doc, "p", {
        text: "Provide the rows as CSV and the variable schema as JSON. Loading starts a new session.",
      }),
    );

    const csvInput = el(doc, "input", { attrs: { id: "csv-file", type: "file", accept: ".csv" } });
    const schemaInput = el(doc, "input", {
      attrs: { id: "schema-file", type: "file", accept: ".json" },
    });
    host.append(el(doc, "label", { text: "Rows CSV " }, [csvInput]));
    host.append(el(doc, "label", { text: " Schema JSON " }, [schemaInput]));
    host.append(
      el(doc, "button", {
        attrs: { id: "upload", type: "button" },
        text: "Load",
        onClick: () => {
          this.pending = this.pending.then(async () => {
            const csv = csvInput.files?.[0];
            const schema = schemaInput.files?.[0];
            if (!csv || !schema) {
              this.banner.error("choose both a CSV file and a schema file");
              return;
            }
            try {
              await this.loadDataset(csv, schema);
            } catch (err) {
              this.banner.error(err instanceof Error ? err.message : String(err));
            }
          });
        },
      }),
    );
  }

  /** Upload a dataset and enter the Data Explorer. */
  async loadDataset(csv: string | Blob, schema: string | Blob): Promise<void> {
    const uploaded = await this.api.uploadDataset(csv, schema);
    const fresh = initialState();
    fresh.datasetId = uploaded.dataset_id;
    fresh.sessionId = uploaded.session_id;
    Object.assign(this.state, fresh);
    this.show("data");
    await this.idle();
  }
}

export function mount(win: Window, root: HTMLElement, baseUrl?: string): App {
  const api = new ApiClient(baseUrl ?? resolveBaseUrl(win));
  const app = new App(api, root);
  app.show("upload");
  return app;
}

declare global {
  interface Window {
    workbench?: App;
  }
}

// Browser entry point; tests import mount() with their own DOM instead.
if (typeof window !== "undefined" && typeof document !== "undefined") {
  const root = document.getElementById("app");
  if (root) {
    window.workbench = mount(window, root);
  }
}
