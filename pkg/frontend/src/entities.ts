import type { SessionView, TreeNodeView } from "./api.js";

const DETERMINERS = new Set([
  "the", "a", "an", "his", "her", "its", "their", "this", "that",
]);

function pathToCursor(tree: TreeNodeView, cursor: number): TreeNodeView[] {
  const walk = (node: TreeNodeView, trail: TreeNodeView[]): TreeNodeView[] | null => {
    const here = [...trail, node];
    if (node.node_id === cursor) return here;
    for (const child of node.children) {
      const found = walk(child, here);
      if (found) return found;
    }
    return null;
  };
  return walk(tree, []) ?? [tree];
}

/** Candidate entities harvested from the events along the current context
 * path: determiner-led bigrams plus bare leading tokens. */
export function suggestEntities(view: SessionView, limit = 8): string[] {
  const seen = new Set<string>();
  const suggestions: string[] = [];
  const push = (phrase: string) => {
    const key = phrase.toLowerCase();
    if (!seen.has(key) && suggestions.length < limit) {
      seen.add(key);
      suggestions.push(phrase);
    }
  };
  for (const node of pathToCursor(view.tree, view.cursor)) {
    const tokens = node.event.split(/\s+/).filter(Boolean);
    for (let i = 0; i < tokens.length - 1; i++) {
      if (DETERMINERS.has(tokens[i].toLowerCase())) {
        push(`${tokens[i]} ${tokens[i + 1]}`);
      }
    }
    if (tokens.length > 0 && !DETERMINERS.has(tokens[0].toLowerCase())) {
      push(tokens[0]);
    }
  }
  return suggestions;
}
