// Wire types mirroring the annotation service responses.

export type WireLabel =
  | "yes"
  | "no"
  | "no_facts"
  | "no_special_regime"
  | "unsure"
  | "review";

export interface ArticleInfo {
  number: string;
  book: string | null;
  hierarchy: [string, string][];
  text: string;
}

export interface PairView {
  pair_id: string;
  article: ArticleInfo;
  chunk_text: string;
  decision_id: string;
  decision_text: string;
  highlight_span: [number, number];
  labels: Record<string, WireLabel>;
  agreement: "agree" | "disagree" | null;
  score: number | null;
}

export interface QueuePage {
  total: number;
  cursor: number;
  items: PairView[];
}

export interface CandidatePage extends QueuePage {
  article_number: string;
  next_cursor: number | null;
}

export interface LabelRecord {
  pair_id: string;
  annotator_id: string;
  label: WireLabel;
  ts: string;
}

export interface AgreementReport {
  n_pairs: number;
  n_resolved: number;
  n_pending: number;
  n_unadjudicated: number;
  observed_agreement: number | null;
  kappa: number | null;
  confusion_a1_a2: {
    yes_yes: number;
    yes_no: number;
    no_yes: number;
    no_no: number;
  };
  n_disagreements: number;
  disagreement_structure: {
    facts_party_claims: number;
    residual_no: number;
    special_regime: number;
    yes: number;
  };
  gold: { yes: number; no: number };
  yes_rates: { a1: number | null; a2: number | null };
  annotators?: Record<string, string>;
}
