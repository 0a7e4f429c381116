/**
 * Minimal element-tree helpers.
 *
 * Views build plain VNode trees (pure data, testable without a DOM);
 * `mount` materializes a tree into real DOM elements in the browser.
 */

export type Handler = (event: Event) => void;

export interface VNode {
  tag: string;
  attrs: Record<string, string>;
  handlers: Record<string, Handler>;
  children: (VNode | string)[];
}

type Child = VNode | string | null | undefined | false;

export function el(
  tag: string,
  attrs: Record<string, string | Handler | undefined> = {},
  ...children: Child[]
): VNode {
  const plain: Record<string, string> = {};
  const handlers: Record<string, Handler> = {};
  for (const [key, value] of Object.entries(attrs)) {
    if (value === undefined) continue;
    if (key.startsWith("on") && typeof value === "function") {
      handlers[key.slice(2).toLowerCase()] = value;
    } else if (typeof value === "string") {
      plain[key] = value;
    }
  }
  return {
    tag,
    attrs: plain,
    handlers,
    children: children.filter(
      (c): c is VNode | string => c !== null && c !== undefined && c !== false,
    ),
  };
}

export function text(node: VNode | string): string {
  if (typeof node === "string") return node;
  return node.children.map(text).join("");
}

/** Depth-first walk over every element node of a tree. */
export function walk(node: VNode, visit: (node: VNode) => void): void {
  visit(node);
  for (const child of node.children) {
    if (typeof child !== "string") walk(child, visit);
  }
}

export function findAll(
  node: VNode,
  predicate: (node: VNode) => boolean,
): VNode[] {
  const found: VNode[] = [];
  walk(node, (n) => {
    if (predicate(n)) found.push(n);
  });
  return found;
}

export function findByAttr(node: VNode, attr: string, value: string): VNode[] {
  return findAll(node, (n) => n.attrs[attr] === value);
}

/** Materialize a VNode into a real DOM element (browser only). */
export function mount(node: VNode | string, doc: Document): Node {
  if (typeof node === "string") return doc.createTextNode(node);
  const element = doc.createElement(node.tag);
  for (const [key, value] of Object.entries(node.attrs)) {
    element.setAttribute(key, value);
  }
  for (const [event, handler] of Object.entries(node.handlers)) {
    element.addEventListener(event, handler);
  }
  for (const child of node.children) {
    element.appendChild(mount(child, doc));
  }
  return element;
}

/** Replace the children of a container with a freshly mounted tree. */
export function replaceChildren(
  container: Element,
  node: VNode,
  doc: Document,
): void {
  container.replaceChildren(mount(node, doc));
}
