// Position renderer.  Every clickable affordance is derived from the server's
// legalMoves list — there is no client-side legality logic.  The invariant
// (enabled affordances == legalMoves, exactly) is guaranteed structurally:
// moves the tree walk cannot place are rendered in a catch-all row.

import { SessionState } from "./api.js";
import { DisplayNode, activeIndex, parseDisplay } from "./formula.js";

export interface InlineError {
  move: string; // the offending move ("" for non-move errors)
  detail: string;
}

export type MoveHandler = (move: string) => void;

const OP_LABEL: Record<string, string> = {
  "&": "∧", "|": "∨", "*": "⊓", "+": "⊔", "&>": "△", "|>": "▽",
};

function el(tag: string, cls?: string, text?: string): HTMLElement {
  const e = document.createElement(tag);
  if (cls) e.className = cls;
  if (text !== undefined) e.textContent = text;
  return e;
}

function moveButton(
  move: string, label: string, enabled: boolean,
  onMove: MoveHandler, claimed: Set<string>, error?: InlineError,
): HTMLElement {
  const wrap = el("span", "affordance");
  const b = el("button", enabled ? "move" : "move greyed", label) as HTMLButtonElement;
  b.dataset.move = move;
  b.disabled = !enabled;
  b.addEventListener("click", () => onMove(move));
  if (enabled) claimed.add(move);
  wrap.appendChild(b);
  if (error && error.move === move) {
    wrap.appendChild(el("span", "error-inline", error.detail));
  }
  return wrap;
}

function renderNode(
  node: DisplayNode, prefix: string, legal: Set<string>, dimmed: boolean,
  onMove: MoveHandler, claimed: Set<string>, error?: InlineError,
): HTMLElement {
  const box = el("span", `node ${node.kind}${dimmed ? " abandoned" : ""}`);
  if (node.neg) box.appendChild(el("span", "op", "¬"));
  switch (node.kind) {
    case "atom": {
      box.appendChild(el("span", "atom-name", node.text));
      // moves played inside an interpreted atom's own game (the engine's view
      // does not expand interpretations, so the remainder is shown verbatim)
      for (const m of [...legal].sort()) {
        if (m.startsWith(prefix) && m !== prefix && !claimed.has(m)) {
          box.appendChild(moveButton(m, m.slice(prefix.length), true, onMove, claimed, error));
        }
      }
      break;
    }
    case "cho": {
      box.appendChild(el("span", "op", OP_LABEL[node.op!]));
      box.appendChild(document.createTextNode("("));
      // claim every index button up front so child atoms don't re-absorb
      // sibling choice moves through their catch-all
      const buttons = node.children.map((_, i) => {
        const mv = prefix + String(i + 1);
        return moveButton(mv, String(i + 1), legal.has(mv), onMove, claimed, error);
      });
      node.children.forEach((c, i) => {
        if (i > 0) box.appendChild(el("span", "op", ` ${OP_LABEL[node.op!]} `));
        box.appendChild(buttons[i]);
        box.appendChild(renderNode(c, prefix, legal, dimmed, onMove, claimed, error));
      });
      box.appendChild(document.createTextNode(")"));
      break;
    }
    case "par": {
      box.appendChild(document.createTextNode("("));
      node.children.forEach((c, i) => {
        if (i > 0) box.appendChild(el("span", "op", ` ${OP_LABEL[node.op!]} `));
        box.appendChild(renderNode(c, `${prefix}${i + 1}.`, legal, dimmed, onMove, claimed, error));
      });
      box.appendChild(document.createTextNode(")"));
      break;
    }
    case "seq": {
      const act = activeIndex(node);
      const sw = prefix + "§";
      box.appendChild(moveButton(sw, "§", legal.has(sw), onMove, claimed, error));
      box.appendChild(document.createTextNode("("));
      node.children.forEach((c, i) => {
        if (i > 0) box.appendChild(el("span", "op", ` ${OP_LABEL[node.op!]} `));
        box.appendChild(renderNode(
          c, i === act ? prefix + "." : prefix, legal,
          dimmed || i < act, onMove, claimed, error));
      });
      box.appendChild(document.createTextNode(")"));
      break;
    }
  }
  return box;
}

export function renderPosition(
  state: SessionState, onMove: MoveHandler, error?: InlineError,
): HTMLElement {
  const root = el("div", "position");
  root.dataset.status = state.status;

  if (state.status === "finished") {
    const who = state.winner === "T" ? "machine (⊤)" : "environment (⊥)";
    const banner = el("div", "banner winner", `Game over — ${who} wins`);
    banner.dataset.winner = state.winner;
    root.appendChild(banner);
  }

  let tree: HTMLElement;
  const legal = new Set(state.legalMoves);
  const claimed = new Set<string>();
  try {
    const display = parseDisplay(state.currentFormulaView);
    tree = el("div", "formula-tree");
    tree.appendChild(renderNode(display, "", legal, false, onMove, claimed, error));
  } catch (e) {
    tree = el("div", "banner error", `render error: ${String(e)}`);
  }
  root.appendChild(tree);

  // catch-all: any legal move the walk could not place still gets exactly one
  // affordance, preserving the affordances == legalMoves invariant
  const leftovers = state.legalMoves.filter((m) => !claimed.has(m));
  if (leftovers.length > 0) {
    const row = el("div", "other-moves");
    row.appendChild(el("span", "label", "other moves: "));
    for (const m of leftovers) {
      row.appendChild(moveButton(m, m, true, onMove, claimed, error));
    }
    root.appendChild(row);
  }

  const history = el("div", "history");
  history.appendChild(el("span", "label", "run: "));
  history.appendChild(el("span", "run-text",
    state.run.map((r) => `${r.by}:${r.m}`).join(" ") || "(empty)"));
  root.appendChild(history);

  if (error && error.move !== "" && !claimed.has(error.move)) {
    // the offending move has no rendered node (e.g. manual entry): show the
    // error in the general banner area instead of silently dropping it
    root.appendChild(el("div", "banner error-inline", error.detail));
  } else if (error && error.move === "") {
    root.appendChild(el("div", "banner error-inline", error.detail));
  }
  return root;
}

/** Enabled affordances currently rendered, for tests and assertions. */
export function enabledMoves(root: HTMLElement): string[] {
  return [...root.querySelectorAll<HTMLButtonElement>("button.move:not(.greyed)")]
    .filter((b) => !b.disabled)
    .map((b) => b.dataset.move!)
    .sort();
}
