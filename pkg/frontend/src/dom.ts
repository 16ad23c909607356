// Thin DOM layer: materializes a RenderModel into elements. All logic
// lives in the pure view model; this file only creates nodes and wires
// click handlers back to the state transitions.

import { RenderModel, IntermediateView } from "./viewmodel.js";
import { SchemaIssue } from "./schema.js";

export interface Handlers {
  onToggle(id: string): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderIntermediate(view: IntermediateView, handlers: Handlers): HTMLElement {
  const card = el("div", `argument ${view.expanded ? "expanded" : ""}`);
  card.dataset.id = view.id;
  card.style.borderColor = view.color;
  card.style.setProperty("--size", String(view.size));

  const bubble = el("button", "bubble");
  bubble.style.transform = `scale(${view.expanded ? 1.15 : view.size})`;
  bubble.style.outlineColor = view.color;
  bubble.appendChild(el("span", "label", view.label));
  bubble.appendChild(el("span", "strength", view.strength.toFixed(4)));
  bubble.addEventListener("click", () => handlers.onToggle(view.id));
  card.appendChild(bubble);

  const edge = el("div", "edge", view.relation ?? "");
  edge.style.color = view.color;
  card.appendChild(edge);

  if (view.detail) {
    const detail = el("div", "detail");
    if (view.detail.cloud.length > 0) {
      const cloud = el("div", "cloud");
      for (const entry of view.detail.cloud) {
        const chip = el("span", "ngram", `${entry.ngram} (${entry.count})`);
        chip.style.fontSize = `${entry.scale}em`;
        cloud.appendChild(chip);
      }
      detail.appendChild(cloud);
    }
    if (view.detail.slices.length > 0) {
      const pie = el("div", "pie");
      for (const slice of view.detail.slices) {
        const row = el("div", `slice ${slice.shade}`);
        const swatch = el("span", "swatch");
        swatch.style.backgroundColor = slice.color;
        swatch.style.opacity = slice.shade === "dark" ? "1" : slice.shade === "mid" ? "0.65" : "0.35";
        row.appendChild(swatch);
        row.appendChild(el("span", "slice-label", `${slice.label} (${(slice.fraction * 100).toFixed(1)}%)`));
        pie.appendChild(row);
      }
      detail.appendChild(pie);
    }
    if (view.detail.patches.length > 0) {
      const gallery = el("div", "gallery");
      for (const patch of view.detail.patches) {
        gallery.appendChild(
          el("span", "patch", `crop [${patch.crop.join(", ")}] a=${patch.activation.toFixed(3)}`),
        );
      }
      detail.appendChild(gallery);
    }
    if (view.detail.rawLabel !== null) {
      detail.appendChild(el("div", "raw-label", view.detail.rawLabel));
    }
    const children = el("div", "children");
    for (const child of view.detail.children) {
      const chip = el("span", "child", `${child.label} ${child.strength.toFixed(4)}`);
      chip.style.color = child.color;
      chip.title = `${child.relation}: ${child.id}`;
      children.appendChild(chip);
    }
    detail.appendChild(children);
    card.appendChild(detail);
  }
  return card;
}

export function render(model: RenderModel, container: HTMLElement, handlers: Handlers): void {
  container.replaceChildren();

  const header = el("header", "prediction");
  header.appendChild(el("h2", undefined, model.header.label));
  header.appendChild(el("span", "probability", model.header.percent));
  header.appendChild(el("span", "strata", `strata: ${model.strata.join(" / ")}`));
  container.appendChild(header);

  const row = el("section", "intermediates");
  for (const view of model.intermediates) {
    row.appendChild(renderIntermediate(view, handlers));
  }
  container.appendChild(row);

  if (model.words.length > 0) {
    const ribbon = el("section", "words");
    for (const word of model.words) {
      const chip = el("span", "word", word.token);
      chip.style.color = word.color;
      chip.style.opacity = String(0.35 + 0.65 * word.intensity);
      chip.title = `aggregate ${word.value.toFixed(5)}`;
      ribbon.appendChild(chip);
    }
    container.appendChild(ribbon);
  }
}

export function renderError(issues: SchemaIssue[], container: HTMLElement): void {
  container.replaceChildren();
  const panel = el("div", "error-panel");
  panel.appendChild(el("h2", undefined, "Document rejected"));
  const list = el("ul");
  for (const issue of issues) {
    list.appendChild(el("li", undefined, `${issue.path}: ${issue.message}`));
  }
  panel.appendChild(list);
  container.appendChild(panel);
}
