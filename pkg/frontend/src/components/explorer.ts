// Trace timeline: one strip entry per timestep with the chosen action, an
// uncertainty flag, and a dominance bar for the chosen action's channels.
// Clicking an entry pre-fills a single-timestep question template.

import type { TimestepRecordView } from "../types.ts";

export function questionTemplate(record: TimestepRecordView): string {
  return `Why did the system choose ${record.chosen_action} at timestep ${record.timestep}?`;
}

function dominanceBar(record: TimestepRecordView): HTMLElement {
  const bar = document.createElement("div");
  bar.className = "dominance-bar";
  const row = record.dominance[record.chosen_action] ?? {};
  const channels = Object.keys(row);
  const total = channels.reduce((sum, channel) => sum + row[channel], 0);
  for (const channel of channels) {
    const segment = document.createElement("span");
    segment.className = `dominance-segment channel-${channel}`;
    const share = total > 0 ? row[channel] / total : 1 / channels.length;
    segment.style.width = `${(share * 100).toFixed(1)}%`;
    segment.title = `${channel}: ${row[channel]}`;
    bar.appendChild(segment);
  }
  return bar;
}

export function renderExplorer(
  container: HTMLElement,
  records: TimestepRecordView[],
  onPick: (template: string) => void,
): void {
  container.replaceChildren();
  for (const record of records) {
    const entry = document.createElement("button");
    entry.type = "button";
    entry.className = record.uncertain
      ? "timestep-entry uncertain"
      : "timestep-entry";
    entry.dataset.timestep = String(record.timestep);

    const step = document.createElement("span");
    step.className = "timestep-number";
    step.textContent = `t=${record.timestep}`;
    entry.appendChild(step);

    const action = document.createElement("span");
    action.className = "timestep-action";
    action.textContent = record.chosen_action;
    entry.appendChild(action);

    if (record.uncertain) {
      const flag = document.createElement("span");
      flag.className = "uncertainty-flag";
      flag.textContent = "uncertain";
      flag.title = `uncertainty score ${record.uncertainty_score}`;
      entry.appendChild(flag);
    }

    entry.appendChild(dominanceBar(record));
    entry.addEventListener("click", () => onPick(questionTemplate(record)));
    container.appendChild(entry);
  }
}
