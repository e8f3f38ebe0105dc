// Page bootstrap: resolve the API base URL, restore the session id,
// build the state, and bind the view.

import { HttpChatApi } from './api.js';
import { ConversationState, restoreSessionId } from './state.js';
import { bindView, ViewElements } from './view.js';

function baseUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return (
    params.get('api') ??
    (window as { COACHBOT_API?: string }).COACHBOT_API ??
    'http://127.0.0.1:8000'
  );
}

function grab<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

document.addEventListener('DOMContentLoaded', () => {
  const api = new HttpChatApi(baseUrl());
  const state = new ConversationState(api, restoreSessionId(sessionStorage));

  const elements: ViewElements = {
    messageLog: grab('messages'),
    input: grab<HTMLInputElement>('utterance'),
    sendButton: grab<HTMLButtonElement>('send'),
    retryButton: grab<HTMLButtonElement>('retry'),
    validation: grab('validation'),
    policySelect: grab<HTMLSelectElement>('policy'),
    temperatureInput: grab<HTMLInputElement>('temperature'),
  };
  bindView(state, elements);

  api
    .health()
    .then((health) => {
      grab('status').textContent =
        `connected: ${health.corpus_posts} posts, ${health.corpus_replies} replies`;
    })
    .catch(() => {
      grab('status').textContent =
        `no server at ${baseUrl()} - start one with: coachbot serve bundle/`;
    });
});
