// DOM rendering and event wiring. Everything interesting happens in
// ConversationState; this layer just mirrors it into the page.

import { ChatMessage, ConversationState } from './state.js';

export interface ViewElements {
  messageLog: HTMLElement;
  input: HTMLInputElement;
  sendButton: HTMLButtonElement;
  retryButton: HTMLButtonElement;
  validation: HTMLElement;
  policySelect: HTMLSelectElement;
  temperatureInput: HTMLInputElement;
}

export function bindView(state: ConversationState, el: ViewElements): void {
  const submit = async () => {
    const text = el.input.value;
    const outcome = await state.send(text);
    if (outcome === 'ok' || outcome === 'rejected') el.input.value = '';
    el.input.focus();
  };

  el.sendButton.addEventListener('click', () => void submit());
  el.input.addEventListener('keydown', (event) => {
    if (event.key === 'Enter') void submit();
  });
  el.retryButton.addEventListener('click', () => void state.retry());

  const applySettings = () => {
    const policy = el.policySelect.value === 'argmax' ? 'argmax' : 'sample';
    state.setPolicy(policy, Number(el.temperatureInput.value));
  };
  el.policySelect.addEventListener('change', applySettings);
  el.temperatureInput.addEventListener('change', applySettings);

  state.onChange(() => render(state, el));
  render(state, el);
}

function render(state: ConversationState, el: ViewElements): void {
  el.input.disabled = state.inFlight;
  el.sendButton.disabled = state.inFlight;
  el.retryButton.hidden = !state.canRetry;
  el.validation.textContent = state.validationMessage;
  el.temperatureInput.disabled = state.settings.policy !== 'sample';

  el.messageLog.replaceChildren(
    ...state.messages.map((message) => renderMessage(state, message)),
  );
  el.messageLog.scrollTop = el.messageLog.scrollHeight;
}

function renderMessage(state: ConversationState, message: ChatMessage): HTMLElement {
  const row = document.createElement('div');
  row.className = `message ${message.author}`;

  const bubble = document.createElement('div');
  bubble.className = 'bubble';
  bubble.textContent = message.text;
  row.appendChild(bubble);

  if (message.author === 'bot' && message.trace) {
    row.appendChild(renderTrace(state, message));
  }
  return row;
}

function renderTrace(state: ConversationState, message: ChatMessage): HTMLElement {
  const trace = message.trace!;
  const details = document.createElement('details'); // collapsed by default
  details.className = 'trace';

  const summary = document.createElement('summary');
  const seed = `seed ${trace.seed}`;
  const fallback = trace.fallback ? ', fallback' : '';
  summary.textContent =
    `how this was chosen (${trace.policy}, ${seed}${fallback})`;
  details.appendChild(summary);

  const table = document.createElement('table');
  const head = document.createElement('tr');
  for (const label of ['', 'p', 'match', 'post', 'reply']) {
    const th = document.createElement('th');
    th.textContent = label;
    head.appendChild(th);
  }
  table.appendChild(head);

  trace.candidates.forEach((candidate, index) => {
    const tr = document.createElement('tr');
    if (index === trace.selected_index) tr.className = 'selected';
    const marker = index === trace.selected_index ? '▶' : '';
    const cells = [
      marker,
      candidate.probability.toFixed(3),
      candidate.match_score.toFixed(3),
      `${candidate.post_id}#${candidate.reply_index}`,
      candidate.text,
    ];
    for (const value of cells) {
      const td = document.createElement('td');
      td.textContent = value;
      tr.appendChild(td);
    }
    table.appendChild(tr);
  });
  details.appendChild(table);
  return details;
}
