// View state: a loaded document plus the set of expanded arguments.
// All transitions are pure; the rendered view is a function of
// (document, expanded set), so collapsing restores the prior view.

import { ExplanationDocument, validateDocument } from "./schema.js";

export interface HoverInfo {
  id: string;
  payload: unknown;
}

export interface ViewState {
  readonly doc: ExplanationDocument;
  readonly expanded: ReadonlySet<string>;
  readonly focus: string | null;
  readonly hover: HoverInfo | null;
}

/** Parse-and-validate a document into the initial (static) view state. */
export function loadDocument(json: unknown): ViewState {
  const doc = validateDocument(json);
  return { doc, expanded: new Set(), focus: null, hover: null };
}

function argumentIds(doc: ExplanationDocument): Set<string> {
  return new Set(doc.arguments.map((a) => a.id));
}

/**
 * Toggle one argument: first click expands and focuses it, the second
 * collapses it again. Unknown ids are ignored with a console warning.
 */
export function expandArgument(state: ViewState, id: string): ViewState {
  if (!argumentIds(state.doc).has(id)) {
    console.warn(`expandArgument: unknown argument id "${id}"`);
    return state;
  }
  const expanded = new Set(state.expanded);
  let focus: string | null;
  if (expanded.has(id)) {
    expanded.delete(id);
    focus = state.focus === id ? null : state.focus;
  } else {
    expanded.add(id);
    focus = id;
  }
  // any transition invalidates hover tooltips: the layout changed
  return { doc: state.doc, expanded, focus, hover: null };
}

export function setHover(state: ViewState, hover: HoverInfo | null): ViewState {
  return { ...state, hover };
}

/** Collapse everything, returning to the static view. */
export function collapseAll(state: ViewState): ViewState {
  return { doc: state.doc, expanded: new Set(), focus: null, hover: null };
}
