/** Common view machinery.
 *
 * Mutations run through act(), which serializes handlers, routes ApiError to
 * the banner, and lets tests await quiescence via idle(). There is no
 * optimistic rendering anywhere: views re-read server state only after the
 * mutation response arrives.
 */

import { ApiClient, ApiError } from "../api.js";
import { Banner } from "../components/banner.js";
import type { ViewName, ViewState } from "../state.js";

export abstract class View {
  private pending: Promise<void> = Promise.resolve();

  constructor(
    protected readonly api: ApiClient,
    protected readonly state: ViewState,
    protected readonly host: HTMLElement,
    protected readonly banner: Banner,
    protected readonly navigate: (view: ViewName) => void,
  ) {}

  protected get doc(): Document {
    return this.host.ownerDocument;
  }

  abstract render(): Promise<void>;

  /** Wait until all queued handlers have settled. */
  idle(): Promise<void> {
    return this.pending;
  }

  protected act(fn: () => Promise<void>): void {
    this.pending = this.pending.then(fn).catch((err) => this.handleError(err));
  }

  protected handleError(err: unknown): void {
    if (err instanceof ApiError) {
      if (err.isStaleVersion) {
        this.banner.staleVersion(err, () => this.act(() => this.onStaleReload()));
      } else {
        this.banner.apiError(err);
      }
      return;
    }
    this.banner.error(err instanceof Error ? err.message : String(err));
  }

  /** Refresh server state after a stale-version conflict. */
  protected onStaleReload(): Promise<void> {
    return this.render();
  }
}
