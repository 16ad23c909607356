// Entry point: load a document from drag-and-drop, file picker, or a
// ?doc= URL and re-render the pure view on every state transition.

import { render, renderError } from "./dom.js";
import { SchemaError } from "./schema.js";
import { ViewState, expandArgument, loadDocument } from "./state.js";
import { buildRenderModel } from "./viewmodel.js";

let state: ViewState | null = null;

function app(): HTMLElement {
  return document.getElementById("app")!;
}

function redraw(): void {
  if (state === null) return;
  render(buildRenderModel(state), app(), {
    onToggle(id) {
      if (state !== null) {
        state = expandArgument(state, id);
        redraw();
      }
    },
  });
}

function openText(text: string): void {
  let parsed: unknown;
  try {
    parsed = JSON.parse(text);
  } catch (err) {
    renderError([{ path: "$", message: `not valid JSON: ${String(err)}` }], app());
    return;
  }
  try {
    state = loadDocument(parsed);
  } catch (err) {
    if (err instanceof SchemaError) {
      renderError(err.issues, app());
      return;
    }
    throw err;
  }
  redraw();
}

function wireDropZone(): void {
  const zone = document.getElementById("drop-zone")!;
  zone.addEventListener("dragover", (event) => {
    event.preventDefault();
    zone.classList.add("hover");
  });
  zone.addEventListener("dragleave", () => zone.classList.remove("hover"));
  zone.addEventListener("drop", (event) => {
    event.preventDefault();
    zone.classList.remove("hover");
    const file = event.dataTransfer?.files?.[0];
    if (file) {
      file.text().then(openText);
    }
  });
  const picker = document.getElementById("file-picker") as HTMLInputElement;
  picker.addEventListener("change", () => {
    const file = picker.files?.[0];
    if (file) {
      file.text().then(openText);
    }
  });
}

function loadFromQuery(): void {
  const url = new URLSearchParams(window.location.search).get("doc");
  if (!url) return;
  fetch(url)
    .then((resp) => resp.text())
    .then(openText)
    .catch((err) => renderError([{ path: "$", message: `cannot fetch ${url}: ${err}` }], app()));
}

wireDropZone();
loadFromQuery();
