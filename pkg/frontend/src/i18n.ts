// Greek-first interface strings with an English toggle.

export type Lang = "el" | "en";

const STRINGS = {
  el: {
    title: "Βοηθός μελέτης",
    corpus: "Μάθημα",
    model: "Μοντέλο τεμαχισμού",
    topK: "Βάθος ανάκτησης (Top-K)",
    custom: "Προσαρμοσμένο",
    questionPlaceholder: "Γράψε την ερώτησή σου…",
    submit: "Υποβολή",
    pending: "Αναζήτηση στο υλικό…",
    sources: "Πηγές",
    sourceLabel: (i: number) => `[Πηγή ${i}]`,
    similarity: "ομοιότητα",
    errorPrefix: "Σφάλμα",
    noCorpora: "Δεν υπάρχουν διαθέσιμα μαθήματα.",
    langToggle: "English",
    invalidTopK: "Το Top-K πρέπει να είναι τουλάχιστον 1.",
  },
  en: {
    title: "Study assistant",
    corpus: "Course",
    model: "Chunking model",
    topK: "Retrieval depth (Top-K)",
    custom: "Custom",
    questionPlaceholder: "Type your question…",
    submit: "Submit",
    pending: "Searching the material…",
    sources: "Sources",
    sourceLabel: (i: number) => `[Πηγή ${i}]`, // citation labels stay Greek, matching the answers
    similarity: "similarity",
    errorPrefix: "Error",
    noCorpora: "No courses available.",
    langToggle: "Ελληνικά",
    invalidTopK: "Top-K must be at least 1.",
  },
};

let current: Lang = "el";

export function setLang(lang: Lang): void {
  current = lang;
}

export function getLang(): Lang {
  return current;
}

export function t(): (typeof STRINGS)["el"] {
  return STRINGS[current];
}
