/**
 * Minimal virtual-node layer. Panel renderers build plain trees so tests can
 * walk them in a node environment; mount() turns a tree into real DOM in the
 * browser.
 */

export type Handler = (event?: unknown) => void;
export type AttrValue = string | number | boolean | Handler | undefined;
export type Attrs = Record<string, AttrValue>;

export interface VNode {
  tag: string;
  attrs: Attrs;
  children: Array<VNode | string>;
}

type Child = VNode | string | number | null | undefined | false | Child[];

export function h(tag: string, attrs: Attrs = {}, ...children: Child[]): VNode {
  const flat: Array<VNode | string> = [];
  const push = (c: Child) => {
    if (c === null || c === undefined || c === false) return;
    if (Array.isArray(c)) {
      c.forEach(push);
    } else if (typeof c === "number") {
      flat.push(String(c));
    } else {
      flat.push(c);
    }
  };
  children.forEach(push);
  return { tag, attrs, children: flat };
}

/** Depth-first search over a tree. */
export function find(root: VNode, pred: (n: VNode) => boolean): VNode[] {
  const out: VNode[] = [];
  const walk = (n: VNode) => {
    if (pred(n)) out.push(n);
    for (const c of n.children) {
      if (typeof c !== "string") walk(c);
    }
  };
  walk(root);
  return out;
}

export function findByClass(root: VNode, cls: string): VNode[] {
  return find(root, (n) => {
    const c = n.attrs.class;
    return typeof c === "string" && c.split(/\s+/).includes(cls);
  });
}

/** Concatenated text content of a subtree. */
export function text(node: VNode | string): string {
  if (typeof node === "string") return node;
  return node.children.map(text).join("");
}

/** Simulate an event by invoking the handler attribute (tests only). */
export function fire(node: VNode, event: string, payload?: unknown): void {
  const handler = node.attrs["on" + event];
  if (typeof handler !== "function") {
    throw new Error(`no on${event} handler on <${node.tag}>`);
  }
  (handler as Handler)(payload);
}

const SVG_TAGS = new Set(["svg", "line", "rect", "circle", "polyline", "path", "g",
                          "text", "defs", "pattern", "title"]);

/** Browser-only: realize a tree as DOM under the given parent. */
export function mount(parent: Element, node: VNode | string, inSvg = false): Node {
  if (typeof node === "string") {
    const t = document.createTextNode(node);
    parent.appendChild(t);
    return t;
  }
  const svg = inSvg || SVG_TAGS.has(node.tag);
  const el = svg
    ? document.createElementNS("http://www.w3.org/2000/svg", node.tag)
    : document.createElement(node.tag);
  for (const [key, value] of Object.entries(node.attrs)) {
    if (value === undefined || value === false) continue;
    if (key.startsWith("on") && typeof value === "function") {
      el.addEventListener(key.slice(2).toLowerCase(), value as EventListener);
    } else {
      el.setAttribute(key, String(value === true ? "" : value));
    }
  }
  for (const child of node.children) mount(el, child, svg && node.tag !== "foreignObject");
  parent.appendChild(el);
  return el;
}

export function replaceChildren(parent: Element, node: VNode): void {
  parent.textContent = "";
  mount(parent, node);
}
