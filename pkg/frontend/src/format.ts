/** Display formatting for server-sent numbers.
 *
 * Two forms only: integers verbatim, fractions at two decimals. Keeping the
 * formatter set this small lets the fidelity tests prove that every rendered
 * numeric token is one of these two images of an API value.
 */

export function formatCount(n: number): string {
  return String(n);
}

export function formatRate(x: number): string {
  return x.toFixed(2);
}

export function formatValue(v: number | string): string {
  if (typeof v === "string") return v;
  return Number.isInteger(v) ? String(v) : v.toFixed(2);
}

/** Signed difference of two server confidences, marked as derived in the DOM. */
export function formatDelta(newer: number, older: number): string {
  const delta = newer - older;
  const sign = delta >= 0 ? "+" : "";
  return `${sign}${delta.toFixed(2)}`;
}
