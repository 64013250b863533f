// The six response options shown to annotators, in display order, with
// their wire values. The French wording is what annotators see; collapsing
// to gold happens server-side only.

import type { WireLabel } from "./types.js";

export interface LabelOption {
  wire: WireLabel;
  french: string;
  tooltip: string;
  key: string; // keyboard shortcut
}

export const LABEL_OPTIONS: LabelOption[] = [
  {
    wire: "yes",
    french: "Oui",
    tooltip: "L'article est appliqué implicitement dans l'extrait.",
    key: "1",
  },
  {
    wire: "no",
    french: "Non",
    tooltip: "L'article n'est pas appliqué.",
    key: "2",
  },
  {
    wire: "no_facts",
    french: "Non, faits ou prétentions des parties uniquement",
    tooltip: "L'extrait décrit des faits ou les prétentions des parties, sans raisonnement juridique.",
    key: "3",
  },
  {
    wire: "no_special_regime",
    french: "Non, application d'un régime spécial",
    tooltip: "Le raisonnement relève d'un autre régime juridique que l'article proposé.",
    key: "4",
  },
  {
    wire: "unsure",
    french: "Je ne sais pas",
    tooltip: "Impossible de trancher avec les éléments disponibles.",
    key: "5",
  },
  {
    wire: "review",
    french: "À revoir",
    tooltip: "Mettre de côté pour y revenir plus tard.",
    key: "6",
  },
];

export function wireLabelFor(french: string): WireLabel {
  const option = LABEL_OPTIONS.find((o) => o.french === french);
  if (!option) {
    throw new Error(`unknown label option: ${french}`);
  }
  return option.wire;
}

export function optionForKey(key: string): LabelOption | undefined {
  return LABEL_OPTIONS.find((o) => o.key === key);
}

export function frenchFor(wire: WireLabel): string {
  const option = LABEL_OPTIONS.find((o) => o.wire === wire);
  return option ? option.french : wire;
}
