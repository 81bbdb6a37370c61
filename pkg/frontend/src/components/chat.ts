// Chat transcript rendering. Every displayed fact is copied verbatim from
// the server response: answers, type badge, timesteps, prompts, usage.

import type { MessagePair } from "../state.ts";
import type { AskResponse, PromptStage } from "../types.ts";

export function formatTimesteps(timesteps: number[]): string {
  if (timesteps.length === 0) return "t=?";
  if (timesteps.length === 1) return `t=${timesteps[0]}`;
  return `t=${timesteps[0]}..${timesteps[timesteps.length - 1]}`;
}

export function badgeText(response: AskResponse): string {
  const window = formatTimesteps(response.timesteps_used);
  const suffix = response.defaulted ? " (default window)" : "";
  return `Type ${response.question_type} · ${window}${suffix}`;
}

export function extractDineJson(stages: PromptStage[]): string {
  for (const stage of stages) {
    for (const message of stage.messages) {
      const text = message.text.trim();
      if (text.startsWith("***") && text.endsWith("***") && text.length > 6) {
        return text.slice(3, -3);
      }
      // zero-shot: the payload sits between delimiters inside one message
      const parts = text.split("***");
      if (parts.length >= 3) return parts[1];
    }
  }
  return "";
}

function promptPanel(stages: PromptStage[], usage: AskResponse["usage"]): HTMLElement {
  const details = document.createElement("details");
  details.className = "prompt-panel";
  const summary = document.createElement("summary");
  summary.textContent = `prompts (${usage.prompt_tokens} prompt + ${usage.completion_tokens} completion tokens)`;
  details.appendChild(summary);
  for (const stage of stages) {
    const heading = document.createElement("h4");
    heading.textContent = `stage ${stage.stage}`;
    details.appendChild(heading);
    for (const message of stage.messages) {
      const block = document.createElement("pre");
      block.className = `prompt-message role-${message.role}`;
      block.textContent = `[${message.role}] ${message.text}`;
      details.appendChild(block);
    }
  }
  const dine = extractDineJson(stages);
  if (dine) {
    const heading = document.createElement("h4");
    heading.textContent = "DINE JSON";
    details.appendChild(heading);
    const block = document.createElement("pre");
    block.className = "dine-json";
    block.textContent = dine;
    details.appendChild(block);
  }
  return details;
}

export function renderPair(pair: MessagePair): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "pair";

  const question = document.createElement("div");
  question.className = "bubble question";
  question.textContent = pair.question;
  wrap.appendChild(question);

  if (pair.error !== null) {
    const error = document.createElement("div");
    error.className = "bubble error";
    error.textContent = pair.error;
    wrap.appendChild(error);
    return wrap;
  }
  if (pair.response === null) {
    const pending = document.createElement("div");
    pending.className = "bubble pending";
    pending.textContent = "…";
    wrap.appendChild(pending);
    return wrap;
  }

  const response = pair.response;
  const answer = document.createElement("div");
  answer.className = "bubble answer";

  const badge = document.createElement("span");
  badge.className = `badge type-${response.question_type.toLowerCase()}`;
  badge.textContent = badgeText(response);
  answer.appendChild(badge);

  for (const text of response.answers) {
    const paragraph = document.createElement("p");
    paragraph.className = "answer-text";
    paragraph.textContent = text;
    answer.appendChild(paragraph);
  }

  if (response.grading) {
    const grading = document.createElement("p");
    grading.className = "grading";
    grading.textContent = `grading: ${response.grading.grades.join(", ")}`;
    answer.appendChild(grading);
  }

  answer.appendChild(promptPanel(response.prompts, response.usage));
  wrap.appendChild(answer);
  return wrap;
}

export function renderChat(container: HTMLElement, messages: MessagePair[]): void {
  container.replaceChildren();
  if (messages.length === 0) {
    const empty = document.createElement("p");
    empty.className = "muted";
    empty.textContent = "Ask a question about the agent's decisions.";
    container.appendChild(empty);
    return;
  }
  for (const pair of messages) container.appendChild(renderPair(pair));
}
