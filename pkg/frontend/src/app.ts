// Application wiring: settings panel, chat log, submit flow.
//
// One request is in flight at a time; the submit control is disabled while
// pending and whenever the question box is blank. Service errors surface as
// dismissible banners above the chat without touching existing turns.

import { ApiError, ask, corpora, CorpusInfo } from "./api";
import { getLang, setLang, t } from "./i18n";
import { MODEL_IDS, SessionState, TOP_K_PRESETS } from "./state";
import { renderErrorBanner, renderPending, renderTurn } from "./ui";

export interface App {
  state: SessionState;
  submit(): Promise<void>;
  setQuestion(text: string): void;
  root: HTMLElement;
}

function option(value: string, label: string): HTMLOptionElement {
  const node = document.createElement("option");
  node.value = value;
  node.textContent = label;
  return node;
}

export function createApp(root: HTMLElement, base = ""): App {
  const state = new SessionState();
  root.innerHTML = `
    <header>
      <h1 class="app-title"></h1>
      <button type="button" class="lang-toggle"></button>
    </header>
    <section class="settings">
      <label class="corpus-label"><span></span>
        <select class="corpus-select"></select>
      </label>
      <label class="model-label"><span></span>
        <select class="model-select"></select>
      </label>
      <label class="topk-label"><span></span>
        <select class="topk-select"></select>
        <input class="topk-custom" type="number" min="1" hidden />
      </label>
    </section>
    <div class="banners"></div>
    <main class="chat"></main>
    <form class="ask-form">
      <textarea class="question-input" rows="2"></textarea>
      <button type="submit" class="submit" disabled></button>
    </form>
  `;

  const title = root.querySelector<HTMLElement>(".app-title")!;
  const langToggle = root.querySelector<HTMLButtonElement>(".lang-toggle")!;
  const corpusSelect = root.querySelector<HTMLSelectElement>(".corpus-select")!;
  const modelSelect = root.querySelector<HTMLSelectElement>(".model-select")!;
  const topkSelect = root.querySelector<HTMLSelectElement>(".topk-select")!;
  const topkCustom = root.querySelector<HTMLInputElement>(".topk-custom")!;
  const banners = root.querySelector<HTMLElement>(".banners")!;
  const chat = root.querySelector<HTMLElement>(".chat")!;
  const form = root.querySelector<HTMLFormElement>(".ask-form")!;
  const input = root.querySelector<HTMLTextAreaElement>(".question-input")!;
  const submitButton = root.querySelector<HTMLButtonElement>(".submit")!;

  for (const id of MODEL_IDS) {
    modelSelect.appendChild(option(String(id), `${id}`));
  }
  modelSelect.value = String(state.settings.model_id);

  function applyStrings(): void {
    title.textContent = t().title;
    langToggle.textContent = t().langToggle;
    root.querySelector<HTMLElement>(".corpus-label span")!.textContent = t().corpus;
    root.querySelector<HTMLElement>(".model-label span")!.textContent = t().model;
    root.querySelector<HTMLElement>(".topk-label span")!.textContent = t().topK;
    input.placeholder = t().questionPlaceholder;
    submitButton.textContent = t().submit;
    const custom = topkSelect.querySelector<HTMLOptionElement>('option[value="custom"]');
    if (custom) custom.textContent = t().custom;
  }

  for (const preset of TOP_K_PRESETS) {
    topkSelect.appendChild(option(String(preset), String(preset)));
  }
  topkSelect.appendChild(option("custom", ""));
  topkSelect.value = String(state.settings.top_k);

  applyStrings();

  langToggle.addEventListener("click", () => {
    setLang(getLang() === "el" ? "en" : "el");
    applyStrings();
  });

  function showError(message: string): void {
    banners.appendChild(renderErrorBanner(message));
  }

  corpora(base)
    .then((list: CorpusInfo[]) => {
      if (list.length === 0) {
        showError(t().noCorpora);
        return;
      }
      for (const corpus of list) {
        corpusSelect.appendChild(option(corpus.corpus_id, corpus.title));
      }
      state.configure({ corpus_id: list[0].corpus_id });
      corpusSelect.value = state.settings.corpus_id;
    })
    .catch((error: unknown) => showError(String(error)));

  corpusSelect.addEventListener("change", () => {
    state.configure({ corpus_id: corpusSelect.value });
  });

  modelSelect.addEventListener("change", () => {
    state.configure({ model_id: Number(modelSelect.value) });
  });

  function applyTopK(): void {
    if (topkSelect.value === "custom") {
      topkCustom.hidden = false;
      const value = Number(topkCustom.value);
      if (Number.isInteger(value) && value >= 1) {
        topkCustom.setCustomValidity("");
        state.configure({ top_k: value });
      } else {
        topkCustom.setCustomValidity(t().invalidTopK);
      }
    } else {
      topkCustom.hidden = true;
      state.configure({ top_k: Number(topkSelect.value) });
    }
  }

  topkSelect.addEventListener("change", applyTopK);
  topkCustom.addEventListener("input", applyTopK);

  function refreshSubmit(): void {
    submitButton.disabled = state.pending || input.value.trim() === "";
  }

  input.addEventListener("input", refreshSubmit);

  async function submit(): Promise<void> {
    const question = input.value.trim();
    if (question === "" || state.pending) return;

    state.pending = true;
    refreshSubmit();
    const pendingNode = renderPending();
    chat.appendChild(pendingNode);

    try {
      const response = await ask(
        {
          question,
          corpus_id: state.settings.corpus_id,
          model_id: state.settings.model_id,
          top_k: state.settings.top_k,
        },
        base,
      );
      const turn = state.addTurn(question, response);
      chat.appendChild(renderTurn(turn));
      input.value = "";
    } catch (error: unknown) {
      // failed requests leave the conversation untouched
      if (error instanceof ApiError) {
        showError(`${error.status} — ${error.detail}`);
      } else {
        showError(String(error));
      }
    } finally {
      pendingNode.remove();
      state.pending = false;
      refreshSubmit();
    }
  }

  form.addEventListener("submit", (event: Event) => {
    event.preventDefault();
    void submit();
  });

  return {
    state,
    submit,
    setQuestion(text: string) {
      input.value = text;
      refreshSubmit();
    },
    root,
  };
}
