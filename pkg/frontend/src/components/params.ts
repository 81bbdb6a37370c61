// Sampling parameter panel: temperature, top_p, max_token, strategy.

import { ChatState, PARAM_LIMITS, type Strategy } from "../state.ts";

function numberField(
  label: string,
  id: string,
  value: number,
  min: number,
  max: number,
  step: number,
  onChange: (value: number) => void,
): HTMLElement {
  const wrap = document.createElement("label");
  wrap.className = "param";
  wrap.htmlFor = id;
  const caption = document.createElement("span");
  caption.textContent = label;
  const input = document.createElement("input");
  input.type = "number";
  input.id = id;
  input.min = String(min);
  input.max = String(max);
  input.step = String(step);
  input.value = String(value);
  input.addEventListener("change", () => {
    onChange(Number(input.value));
  });
  wrap.append(caption, input);
  return wrap;
}

export function renderParams(container: HTMLElement, state: ChatState): void {
  container.replaceChildren();

  container.appendChild(numberField(
    "temperature", "param-temperature", state.params.temperature,
    PARAM_LIMITS.temperature.min, PARAM_LIMITS.temperature.max, 0.1,
    (value) => {
      state.setTemperature(value);
      renderParams(container, state);
    },
  ));
  container.appendChild(numberField(
    "top_p", "param-top-p", state.params.top_p,
    PARAM_LIMITS.top_p.min, PARAM_LIMITS.top_p.max, 0.05,
    (value) => {
      state.setTopP(value);
      renderParams(container, state);
    },
  ));
  container.appendChild(numberField(
    "max_token", "param-max-token", state.params.max_token,
    PARAM_LIMITS.max_token.min, PARAM_LIMITS.max_token.max, 10,
    (value) => {
      state.setMaxToken(value);
      renderParams(container, state);
    },
  ));

  const wrap = document.createElement("label");
  wrap.className = "param";
  wrap.htmlFor = "param-strategy";
  const caption = document.createElement("span");
  caption.textContent = "strategy";
  const select = document.createElement("select");
  select.id = "param-strategy";
  for (const option of ["engineered", "zero_shot"]) {
    const element = document.createElement("option");
    element.value = option;
    element.textContent = option;
    element.selected = option === state.params.strategy;
    select.appendChild(element);
  }
  select.addEventListener("change", () => {
    state.setStrategy(select.value as Strategy);
  });
  wrap.append(caption, select);
  container.appendChild(wrap);
}
