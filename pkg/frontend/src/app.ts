// Application wiring: session bootstrap, ask flow, trace explorer, and the
// parameter panel. One ask is in flight at a time; the input stays disabled
// until the response lands (or a retry-after countdown expires).

import { ApiClient, ApiError } from "./api.ts";
import { renderChat } from "./components/chat.ts";
import { renderExplorer } from "./components/explorer.ts";
import { renderParams } from "./components/params.ts";
import { ChatState } from "./state.ts";
import type { AskRequest } from "./types.ts";

export type AppHandles = {
  state: ChatState;
  ask: (question: string) => Promise<void>;
  ready: Promise<void>;
};

export function mountApp(root: HTMLElement, api: ApiClient): AppHandles {
  root.innerHTML = `
    <header>
      <h1>dinechat</h1>
      <span id="trace-label" class="muted"></span>
    </header>
    <main>
      <section id="chat-column">
        <div id="chat"></div>
        <form id="ask-form">
          <input id="question" type="text" autocomplete="off"
                 placeholder="Why did the system choose ... at timestep ...?" />
          <button id="send" type="submit">Ask</button>
        </form>
        <p id="status" class="muted"></p>
      </section>
      <aside>
        <h2>Sampling</h2>
        <div id="params"></div>
        <h2>Trace timeline</h2>
        <div id="explorer"></div>
      </aside>
    </main>`;

  const state = new ChatState();
  const chat = root.querySelector<HTMLElement>("#chat")!;
  const explorer = root.querySelector<HTMLElement>("#explorer")!;
  const params = root.querySelector<HTMLElement>("#params")!;
  const form = root.querySelector<HTMLFormElement>("#ask-form")!;
  const input = root.querySelector<HTMLInputElement>("#question")!;
  const send = root.querySelector<HTMLButtonElement>("#send")!;
  const status = root.querySelector<HTMLElement>("#status")!;
  const traceLabel = root.querySelector<HTMLElement>("#trace-label")!;

  renderParams(params, state);
  renderChat(chat, state.messages);

  function setBusy(busy: boolean) {
    state.busy = busy;
    input.disabled = busy;
    send.disabled = busy;
  }

  function countdown(seconds: number) {
    setBusy(true);
    let left = Math.ceil(seconds);
    status.textContent = `rate limited; retrying input in ${left}s`;
    const timer = setInterval(() => {
      left -= 1;
      if (left <= 0) {
        clearInterval(timer);
        status.textContent = "";
        setBusy(false);
      } else {
        status.textContent = `rate limited; retrying input in ${left}s`;
      }
    }, 1000);
  }

  async function ask(question: string): Promise<void> {
    if (!question.trim() || state.busy) return;
    if (!state.sessionId || !state.traceId) {
      status.textContent = "no session yet";
      return;
    }
    const pair = { question, response: null as never, error: null };
    state.messages.push(pair);
    renderChat(chat, state.messages);
    setBusy(true);
    const request: AskRequest = {
      question,
      trace_id: state.traceId,
      strategy: state.params.strategy,
      params: {
        temperature: state.params.temperature,
        top_p: state.params.top_p,
        max_token: state.params.max_token,
      },
    };
    try {
      const response = await api.ask(state.sessionId, request);
      state.messages[state.messages.length - 1] = {
        question,
        response,
        error: null,
      };
      setBusy(false);
    } catch (error) {
      if (error instanceof ApiError) {
        // surface the server's message verbatim (token math, retry-after)
        state.messages[state.messages.length - 1] = {
          question,
          response: null,
          error: `${error.status}: ${error.detail}`,
        };
        const wait = error.retryAfterSeconds;
        if (error.status === 429 && wait !== null) {
          countdown(wait);
        } else {
          setBusy(false);
        }
      } else {
        state.messages[state.messages.length - 1] = {
          question,
          response: null,
          error: String(error),
        };
        setBusy(false);
      }
    }
    renderChat(chat, state.messages);
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const question = input.value;
    input.value = "";
    void ask(question);
  });

  const ready = (async () => {
    state.sessionId = await api.createSession();
    const traces = await api.listTraces();
    if (traces.length === 0) {
      status.textContent = "no traces on the server";
      return;
    }
    const trace = traces[0];
    state.traceId = trace.trace_id;
    traceLabel.textContent =
      `trace ${trace.trace_id} (${trace.timesteps} timesteps, ` +
      `${trace.uncertain_timesteps.length} uncertain)`;
    const records = await api.traceRecords(trace.trace_id);
    renderExplorer(explorer, records, (template) => {
      input.value = template;
      input.focus();
    });
  })();

  return { state, ask, ready };
}
