/** Tiny DOM builders. Views create elements through the host's document so
 * they work under any window implementation, including test DOMs.
 */

export interface ElProps {
  className?: string;
  text?: string;
  attrs?: Record<string, string>;
  onClick?: (ev: Event) => void;
}

export function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  props: ElProps = {},
  children: (HTMLElement | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (props.className) node.className = props.className;
  if (props.text != null) node.textContent = props.text;
  if (props.attrs) {
    for (const [name, value] of Object.entries(props.attrs)) {
      node.setAttribute(name, value);
    }
  }
  if (props.onClick) node.addEventListener("click", props.onClick);
  for (const child of children) {
    node.append(typeof child === "string" ? doc.createTextNode(child) : child);
  }
  return node;
}

export function clear(node: HTMLElement): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

/** A span carrying its displayed value in data-value, so fidelity tests can
 * compare every rendered number against the API response it came from. */
export function valueSpan(
  doc: Document,
  displayed: string,
  extraClass = "",
  derived?: string,
): HTMLSpanElement {
  const attrs: Record<string, string> = { "data-value": displayed };
  if (derived) attrs["data-derived"] = derived;
  return el(doc, "span", {
    className: `value ${extraClass}`.trim(),
    text: displayed,
    attrs,
  });
}
