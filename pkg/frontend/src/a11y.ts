/**
 * Accessibility lint over a rendered element tree.
 *
 * Checks the rules the chat page must hold: non-text content carries
 * alternative text, and every interactive control stays reachable and
 * operable from the keyboard (no unreachable controls, no tab-order
 * overrides, no hidden focusable elements, accessible names on
 * controls).
 */

import { text, VNode, walk } from "./dom.js";

export interface Violation {
  rule: "missing-alt" | "keyboard-trap" | "missing-label";
  tag: string;
  detail: string;
}

const NATIVELY_INTERACTIVE = new Set([
  "button",
  "input",
  "select",
  "textarea",
]);

function isInteractive(node: VNode): boolean {
  if (NATIVELY_INTERACTIVE.has(node.tag)) return true;
  if (node.tag === "a" && node.attrs["href"] !== undefined) return true;
  return Object.keys(node.handlers).includes("click");
}

function accessibleName(node: VNode, labelledIds: Set<string>): string {
  if (node.attrs["aria-label"]) return node.attrs["aria-label"];
  if (node.attrs["aria-labelledby"]) return node.attrs["aria-labelledby"];
  if (node.attrs["id"] && labelledIds.has(node.attrs["id"])) return node.attrs["id"];
  if (node.tag === "input" && node.attrs["placeholder"]) {
    return node.attrs["placeholder"];
  }
  if (node.attrs["alt"]) return node.attrs["alt"];
  return text(node).trim();
}

/** Lint a page tree; an empty result means the page passes. */
export function lint(root: VNode): Violation[] {
  const violations: Violation[] = [];
  const labelledIds = new Set<string>();
  walk(root, (node) => {
    if (node.tag === "label" && node.attrs["for"]) {
      labelledIds.add(node.attrs["for"]);
    }
  });

  walk(root, (node) => {
    // Non-text content must carry alternative text.
    if (node.tag === "img") {
      const alt = node.attrs["alt"];
      if (alt === undefined || alt.trim() === "") {
        violations.push({
          rule: "missing-alt",
          tag: "img",
          detail: `img src=${node.attrs["src"] ?? "?"} has no alt text`,
        });
      }
    }

    const tabindexRaw = node.attrs["tabindex"];
    const tabindex = tabindexRaw === undefined ? null : Number(tabindexRaw);

    // Positive tabindex hijacks the natural tab order.
    if (tabindex !== null && tabindex > 0) {
      violations.push({
        rule: "keyboard-trap",
        tag: node.tag,
        detail: `tabindex=${tabindexRaw} overrides the natural tab order`,
      });
    }

    if (isInteractive(node)) {
      // Interactive elements must stay reachable by keyboard.
      if (tabindex !== null && tabindex < 0) {
        violations.push({
          rule: "keyboard-trap",
          tag: node.tag,
          detail: `interactive <${node.tag}> removed from the tab order`,
        });
      }
      if (node.attrs["aria-hidden"] === "true") {
        violations.push({
          rule: "keyboard-trap",
          tag: node.tag,
          detail: `interactive <${node.tag}> hidden from assistive tech`,
        });
      }
      // Click-only widgets on non-focusable tags cannot be operated
      // by keyboard at all.
      if (
        !NATIVELY_INTERACTIVE.has(node.tag) &&
        node.tag !== "a" &&
        (tabindex === null || tabindex < 0)
      ) {
        violations.push({
          rule: "keyboard-trap",
          tag: node.tag,
          detail: `<${node.tag}> has a click handler but is not focusable`,
        });
      }
      if (accessibleName(node, labelledIds) === "") {
        violations.push({
          rule: "missing-label",
          tag: node.tag,
          detail: `interactive <${node.tag}> has no accessible name`,
        });
      }
    }
  });
  return violations;
}

export function violationsOf(
  root: VNode,
  ...rules: Violation["rule"][]
): Violation[] {
  const wanted = new Set(rules);
  return lint(root).filter((v) => wanted.has(v.rule));
}
