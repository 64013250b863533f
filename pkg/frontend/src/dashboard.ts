// Dashboard projection of the /stats/agreement payload. The view model
// carries the server's values untouched (and the raw payload text), so the
// displayed numbers are exactly what the service reported: the UI performs
// no statistics of its own.

import type { AgreementReport } from "./types.js";

export interface DashboardModel {
  /** Exact payload text the model was built from. */
  payloadText: string;
  /** Parsed payload, unmodified. */
  report: AgreementReport;
  /** Display strings; "–" stands for unavailable, never 0. */
  kappa: string;
  agreementPercent: string;
  goldYes: string;
  goldNo: string;
  disagreements: string;
  yesRateA1: string;
  yesRateA2: string;
  structure: { category: string; count: string }[];
  stale: boolean;
}

const DASH = "–";

function show(value: number | null | undefined): string {
  return value === null || value === undefined ? DASH : String(value);
}

function showPercent(rate: number | null | undefined): string {
  if (rate === null || rate === undefined) {
    return DASH;
  }
  return `${(rate * 100).toFixed(1)}%`;
}

export const STRUCTURE_LABELS: Record<string, string> = {
  facts_party_claims: "Non – faits / prétentions des parties",
  residual_no: "Non – catégorie résiduelle",
  special_regime: "Non – régime spécial",
  yes: "Oui – application implicite",
};

export function dashboardModel(
  payloadText: string,
  report: AgreementReport,
  stale = false,
): DashboardModel {
  const hasLabels = report.n_resolved > 0;
  return {
    payloadText,
    report,
    kappa: hasLabels ? show(report.kappa) : DASH,
    agreementPercent: hasLabels ? showPercent(report.observed_agreement) : DASH,
    goldYes: hasLabels ? show(report.gold.yes) : DASH,
    goldNo: hasLabels ? show(report.gold.no) : DASH,
    disagreements: hasLabels ? show(report.n_disagreements) : DASH,
    yesRateA1: showPercent(report.yes_rates.a1),
    yesRateA2: showPercent(report.yes_rates.a2),
    structure: Object.entries(report.disagreement_structure).map(([category, count]) => ({
      category: STRUCTURE_LABELS[category] ?? category,
      count: hasLabels ? String(count) : DASH,
    })),
    stale,
  };
}
