// Client-side session state. Nothing here survives a page reload: the server
// is stateless and the conversation lives only in this store.

import type { AskResponse, Hit } from "./api";

export interface Settings {
  corpus_id: string;
  model_id: number;
  top_k: number;
}

export interface Source {
  source_index: number; // 1-based retrieval rank
  chunk_id: number;
  similarity: number;
  excerpt: string;
}

export interface ChatTurn {
  question: string;
  answer: string;
  sources: Source[];
  settings: Settings; // snapshot of the settings this turn used
}

export const TOP_K_PRESETS = [20, 50] as const;
export const MODEL_IDS = [1, 2, 3, 4, 5, 6] as const;

export class SessionState {
  turns: ChatTurn[] = [];
  settings: Settings = { corpus_id: "", model_id: 5, top_k: 20 };
  pending = false;
  error: string | null = null;

  configure(update: Partial<Settings>): void {
    if (update.model_id !== undefined && !MODEL_IDS.includes(update.model_id as any)) {
      throw new Error(`model_id ${update.model_id} outside 1..6`);
    }
    if (update.top_k !== undefined && (!Number.isInteger(update.top_k) || update.top_k < 1)) {
      throw new Error(`top_k ${update.top_k} must be a positive integer`);
    }
    this.settings = { ...this.settings, ...update };
  }

  // Sources keep the response's order and similarity values untouched.
  addTurn(question: string, response: AskResponse): ChatTurn {
    const turn: ChatTurn = {
      question,
      answer: response.answer,
      sources: response.hits.map((hit: Hit, index: number) => ({
        source_index: index + 1,
        chunk_id: hit.chunk_id,
        similarity: hit.similarity,
        excerpt: hit.excerpt,
      })),
      settings: { ...this.settings },
    };
    this.turns.push(turn);
    return turn;
  }
}

export function formatSimilarity(value: number): string {
  return value.toFixed(2);
}
