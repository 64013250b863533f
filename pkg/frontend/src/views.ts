// DOM rendering for the three screens: annotation, adjudication, dashboard.
// Views are plain functions from state to DOM; submission side effects are
// injected so tests can drive them without a server.

import type { DashboardModel } from "./dashboard.js";
import { splitHighlight } from "./highlight.js";
import { LABEL_OPTIONS, frenchFor } from "./labels.js";
import type { PairView, WireLabel } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export function renderDecision(view: PairView): HTMLElement {
  const container = el("div", "decision-text");
  const segments = splitHighlight(view.decision_text, view.highlight_span);
  container.append(document.createTextNode(segments.before));
  const mark = el("mark", "chunk-highlight", segments.highlight);
  mark.id = "chunk-highlight";
  container.append(mark);
  container.append(document.createTextNode(segments.after));
  return container;
}

export function renderArticle(view: PairView): HTMLElement {
  const box = el("section", "article-box");
  const path = view.article.hierarchy.map(([, heading]) => heading).join(" › ");
  box.append(el("h2", "article-number", `Article ${view.article.number}`));
  if (path) {
    box.append(el("div", "article-path", path));
  }
  box.append(el("p", "article-text", view.article.text));
  return box;
}

export function renderPriorLabels(view: PairView): HTMLElement {
  const box = el("div", "prior-labels");
  const entries = Object.entries(view.labels).sort(([a], [b]) => a.localeCompare(b));
  for (const [annotator, label] of entries) {
    box.append(el("span", "prior-label", `${annotator} : ${frenchFor(label)}`));
  }
  return box;
}

export interface AnnotationCallbacks {
  onChoose: (label: WireLabel) => void;
}

export function renderAnnotationScreen(
  root: HTMLElement,
  view: PairView,
  position: number,
  total: number,
  callbacks: AnnotationCallbacks,
  showPriorLabels = false,
): void {
  root.replaceChildren();
  const header = el("header", "screen-header");
  header.append(el("span", "progress", `${position + 1} / ${total}`));
  header.append(el("span", "question", "L'article est-il appliqué implicitement ?"));
  root.append(header);
  root.append(renderArticle(view));
  if (showPriorLabels) {
    root.append(renderPriorLabels(view));
  }
  root.append(renderDecision(view));
  const buttons = el("div", "label-buttons");
  for (const option of LABEL_OPTIONS) {
    const button = el("button", "label-button", `${option.key}. ${option.french}`);
    button.title = option.tooltip;
    button.dataset.wire = option.wire;
    button.addEventListener("click", () => callbacks.onChoose(option.wire));
    buttons.append(button);
  }
  root.append(buttons);
  const mark = root.querySelector("#chunk-highlight");
  if (mark && "scrollIntoView" in mark) {
    (mark as HTMLElement).scrollIntoView({ block: "center" });
  }
}

export function renderEmptyQueue(root: HTMLElement, message: string): void {
  root.replaceChildren();
  root.append(el("p", "empty-state", message));
}

export function renderError(root: HTMLElement, message: string): void {
  let banner = root.querySelector<HTMLElement>(".error-banner");
  if (!banner) {
    banner = el("div", "error-banner");
    root.prepend(banner);
  }
  banner.textContent = message;
}

export function renderDashboard(root: HTMLElement, model: DashboardModel): void {
  root.replaceChildren();
  if (model.stale) {
    root.append(el("div", "stale-banner", "Données indisponibles : service injoignable"));
  }
  const cards = el("div", "stat-cards");
  const card = (label: string, value: string, id: string) => {
    const box = el("div", "stat-card");
    box.append(el("div", "stat-label", label));
    const v = el("div", "stat-value", value);
    v.id = id;
    box.append(v);
    cards.append(box);
  };
  card("Kappa de Cohen", model.kappa, "stat-kappa");
  card("Accord observé", model.agreementPercent, "stat-agreement");
  card("OUI (or)", model.goldYes, "stat-gold-yes");
  card("NON (or)", model.goldNo, "stat-gold-no");
  card("Désaccords", model.disagreements, "stat-disagreements");
  card("Taux de OUI A1", model.yesRateA1, "stat-yes-a1");
  card("Taux de OUI A2", model.yesRateA2, "stat-yes-a2");
  root.append(cards);

  const table = el("table", "structure-table");
  const head = el("tr");
  head.append(el("th", undefined, "Résolution des désaccords"), el("th", undefined, "N"));
  table.append(head);
  for (const row of model.structure) {
    const tr = el("tr");
    tr.append(el("td", undefined, row.category), el("td", "structure-count", row.count));
    table.append(tr);
  }
  root.append(table);
}
