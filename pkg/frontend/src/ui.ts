// DOM construction for the chat. Plain elements, no framework: every piece
// of rendered data comes verbatim from the typed API responses.

import { t } from "./i18n";
import { ChatTurn, formatSimilarity } from "./state";

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

export function renderTurn(turn: ChatTurn): HTMLElement {
  const wrap = el("article", "turn");

  const question = el("div", "question", turn.question);
  question.dataset.modelId = String(turn.settings.model_id);
  question.dataset.topK = String(turn.settings.top_k);
  wrap.appendChild(question);

  wrap.appendChild(el("div", "answer", turn.answer));

  const details = el("details", "sources");
  details.appendChild(el("summary", "sources-summary",
    `${t().sources} (${turn.sources.length})`));
  const list = el("ol", "source-list");
  for (const source of turn.sources) {
    const item = el("li", "source");
    item.dataset.chunkId = String(source.chunk_id);
    const label = el("span", "source-label", t().sourceLabel(source.source_index));
    const sim = el("span", "source-similarity",
      `${t().similarity} ${formatSimilarity(source.similarity)}`);
    const excerpt = el("span", "source-excerpt", source.excerpt);
    item.append(label, " ", sim, " — ", excerpt);
    list.appendChild(item);
  }
  details.appendChild(list);
  wrap.appendChild(details);
  return wrap;
}

export function renderErrorBanner(message: string): HTMLElement {
  const banner = el("div", "error-banner", `${t().errorPrefix}: ${message}`);
  banner.setAttribute("role", "alert");
  const dismiss = el("button", "dismiss", "×");
  dismiss.addEventListener("click", () => banner.remove());
  banner.appendChild(dismiss);
  return banner;
}

export function renderPending(): HTMLElement {
  return el("div", "pending", t().pending);
}
