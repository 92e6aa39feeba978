/** The single base-URL setting.
 *
 * Resolution order: localStorage override, then a <meta> tag baked into the
 * page, then the page's own origin. Nothing else in the client reads
 * configuration from anywhere.
 */

const STORAGE_KEY = "workbench.apiBase";
const META_NAME = "workbench-api-base";

export function resolveBaseUrl(win: Window = window): string {
  try {
    const stored = win.localStorage.getItem(STORAGE_KEY);
    if (stored) return stripSlash(stored);
  } catch {
    // localStorage can be unavailable (file:// pages); fall through
  }
  const meta = win.document.querySelector<HTMLMetaElement>(`meta[name="${META_NAME}"]`);
  if (meta?.content) return stripSlash(meta.content);
  return stripSlash(win.location.origin);
}

export function storeBaseUrl(win: Window, base: string): void {
  win.localStorage.setItem(STORAGE_KEY, stripSlash(base));
}

function stripSlash(url: string): string {
  return url.endsWith("/") ? url.slice(0, -1) : url;
}
