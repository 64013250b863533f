// Application bootstrap: hash routing between the annotator queue, the
// adjudication queue and the live dashboard. Single-user session; the
// server is the source of truth and optimistic updates roll back on
// rejection.

import { ApiClient } from "./api.js";
import { dashboardModel } from "./dashboard.js";
import { optionForKey } from "./labels.js";
import { LabelSubmitter, QueueState, advance, currentItem } from "./queue.js";
import type { PairView, WireLabel } from "./types.js";
import {
  renderAnnotationScreen,
  renderDashboard,
  renderEmptyQueue,
  renderError,
} from "./views.js";

const api = new ApiClient("");
const submitter = new LabelSubmitter(api);

interface AppState {
  route: string;
  annotatorId: string;
  queue: QueueState<PairView>;
  adjudicator: boolean;
}

const state: AppState = {
  route: "#annotate",
  annotatorId: "A1",
  queue: { items: [], position: 0 },
  adjudicator: false,
};

function root(): HTMLElement {
  const node = document.getElementById("app");
  if (!node) {
    throw new Error("missing #app container");
  }
  return node;
}

async function loadAnnotationQueue(): Promise<void> {
  const page = await api.annotatorQueue(state.annotatorId, 100);
  state.queue = { items: page.items, position: 0 };
}

async function loadAdjudicationQueue(): Promise<void> {
  const page = await api.adjudicationQueue();
  state.queue = { items: page.items, position: 0 };
}

function showCurrent(): void {
  const view = currentItem(state.queue);
  if (!view) {
    renderEmptyQueue(
      root(),
      state.adjudicator
        ? "Aucun désaccord en attente d'arbitrage."
        : "File d'annotation vide : tout est étiqueté.",
    );
    return;
  }
  renderAnnotationScreen(
    root(),
    view,
    state.queue.position,
    state.queue.items.length,
    { onChoose: (label) => void choose(view, label) },
    state.adjudicator,
  );
}

async function choose(view: PairView, label: WireLabel): Promise<void> {
  // optimistic: move on immediately, reconcile with the server response
  const before = state.queue;
  state.queue = advance(state.queue);
  showCurrent();
  const outcome = await submitter.submit(view.pair_id, state.annotatorId, label);
  if (outcome.status === "rejected") {
    state.queue = before;
    showCurrent();
    renderError(root(), `Étiquette refusée : ${outcome.detail}`);
  } else if (outcome.status === "queued") {
    renderError(root(), "Hors ligne : l'étiquette sera renvoyée automatiquement.");
    window.setTimeout(() => void submitter.flush(), 2000);
  }
}

async function showDashboard(): Promise<void> {
  try {
    const { raw, data } = await api.agreementStats();
    renderDashboard(root(), dashboardModel(raw, data));
  } catch {
    renderDashboard(
      root(),
      dashboardModel(
        "",
        {
          n_pairs: 0,
          n_resolved: 0,
          n_pending: 0,
          n_unadjudicated: 0,
          observed_agreement: null,
          kappa: null,
          confusion_a1_a2: { yes_yes: 0, yes_no: 0, no_yes: 0, no_no: 0 },
          n_disagreements: 0,
          disagreement_structure: {
            facts_party_claims: 0,
            residual_no: 0,
            special_regime: 0,
            yes: 0,
          },
          gold: { yes: 0, no: 0 },
          yes_rates: { a1: null, a2: null },
        },
        true,
      ),
    );
  }
}

async function router(): Promise<void> {
  const hash = window.location.hash || "#annotate";
  state.route = hash;
  const [route, argument] = hash.split("/");
  try {
    if (route === "#annotate") {
      state.annotatorId = argument || "A1";
      state.adjudicator = false;
      await loadAnnotationQueue();
      showCurrent();
    } else if (route === "#adjudicate") {
      state.annotatorId = argument || "A3";
      state.adjudicator = true;
      await loadAdjudicationQueue();
      showCurrent();
    } else if (route === "#dashboard") {
      await showDashboard();
    } else {
      renderEmptyQueue(root(), `Vue inconnue : ${hash}`);
    }
  } catch (error) {
    renderError(root(), `Erreur de chargement : ${String(error)}`);
  }
}

function bindKeyboard(): void {
  window.addEventListener("keydown", (event) => {
    if (state.route.startsWith("#dashboard")) {
      return;
    }
    const option = optionForKey(event.key);
    const view = currentItem(state.queue);
    if (option && view) {
      event.preventDefault();
      void choose(view, option.wire);
    }
  });
}

export function start(): void {
  window.addEventListener("hashchange", () => void router());
  bindKeyboard();
  void router();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  start();
}
