// Typed client for the question-answering service. The shapes mirror the
// server's JSON contracts exactly; nothing is reordered or reformatted here.

export interface AskRequest {
  question: string;
  corpus_id: string;
  model_id: number;
  top_k: number;
}

export interface Hit {
  chunk_id: number;
  similarity: number;
  excerpt: string;
}

export interface AskResponse {
  answer: string;
  hits: Hit[];
  model_id: number;
  top_k: number;
  generator_id: string;
}

export interface CorpusInfo {
  corpus_id: string;
  title: string;
  chunk_counts: Record<string, number>;
  embedder_id: string;
}

export interface Health {
  status: string;
  version: string;
  embedder: string;
  generator: string;
}

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`${status}: ${detail}`);
  }
}

async function parseDetail(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") return body.detail;
    return JSON.stringify(body);
  } catch {
    return response.statusText || "request failed";
  }
}

export async function ask(request: AskRequest, base = ""): Promise<AskResponse> {
  const response = await fetch(`${base}/api/ask`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(request),
  });
  if (!response.ok) {
    throw new ApiError(response.status, await parseDetail(response));
  }
  return (await response.json()) as AskResponse;
}

export async function corpora(base = ""): Promise<CorpusInfo[]> {
  const response = await fetch(`${base}/api/corpora`);
  if (!response.ok) {
    throw new ApiError(response.status, await parseDetail(response));
  }
  return (await response.json()) as CorpusInfo[];
}

export async function health(base = ""): Promise<Health> {
  const response = await fetch(`${base}/api/health`);
  if (!response.ok) {
    throw new ApiError(response.status, await parseDetail(response));
  }
  return (await response.json()) as Health;
}
