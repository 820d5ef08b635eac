import { vi } from "vitest";

import type { AskResponse, CorpusInfo } from "../src/api";

export const CORPORA: CorpusInfo[] = [
  {
    corpus_id: "family-psychology",
    title: "Οικογενειακή Ψυχολογία",
    chunk_counts: { "5": 9 },
    embedder_id: "dimitriz/st-greek-media-bert-base-uncased",
  },
  {
    corpus_id: "sports-medicine",
    title: "Αθλητιατρική",
    chunk_counts: { "6": 40 },
    embedder_id: "dimitriz/st-greek-media-bert-base-uncased",
  },
];

export function askResponse(overrides: Partial<AskResponse> = {}): AskResponse {
  return {
    answer: "Σύμφωνα με τα αποσπάσματα [0, 3, 1] απαντώ στην ερώτηση: «…» (παραλλαγή 0)",
    hits: [
      { chunk_id: 0, similarity: 0.91234, excerpt: "Πρώτο απόσπασμα." },
      { chunk_id: 3, similarity: 0.8377, excerpt: "Δεύτερο απόσπασμα." },
      { chunk_id: 1, similarity: 0.555, excerpt: "Τρίτο απόσπασμα." },
    ],
    model_id: 5,
    top_k: 20,
    generator_id: "gemini-flash-2.0",
    ...overrides,
  };
}

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

export interface FetchMock {
  calls: RecordedCall[];
  askBodies(): any[];
  respondWith(factory: (call: RecordedCall) => Response | Promise<Response>): void;
}

export function json(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

// Installs a fetch mock that answers /api/corpora with the fixture list and
// routes /api/ask through a configurable responder.
export function installFetchMock(
  askResponder: (call: RecordedCall) => Response | Promise<Response> = () => json(askResponse()),
): FetchMock {
  const calls: RecordedCall[] = [];
  let responder = askResponder;

  const mock: FetchMock = {
    calls,
    askBodies: () =>
      calls.filter((c) => c.url.endsWith("/api/ask")).map((c) => c.body),
    respondWith: (factory) => {
      responder = factory;
    },
  };

  vi.stubGlobal("fetch", async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    const call: RecordedCall = {
      url,
      method: init?.method ?? "GET",
      body: init?.body ? JSON.parse(String(init.body)) : undefined,
    };
    calls.push(call);
    if (url.endsWith("/api/corpora")) return json(CORPORA);
    if (url.endsWith("/api/health")) {
      return json({ status: "ok", version: "0.1.0", embedder: "ok", generator: "ok" });
    }
    if (url.endsWith("/api/ask")) return responder(call);
    return json({ detail: `unrouted ${url}` }, 500);
  });

  return mock;
}

export function mount(): HTMLElement {
  document.body.innerHTML = '<div id="app"></div>';
  return document.getElementById("app")!;
}

export async function flush(): Promise<void> {
  await new Promise((resolve) => setTimeout(resolve, 0));
}
