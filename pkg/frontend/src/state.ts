// Conversation state, kept free of DOM concerns so it can be tested
// against a mocked API. The view layer subscribes and re-renders.

import { ApiError, ChatApi, ChatTrace, TraceCandidate } from './api.js';

export type Author = 'user' | 'bot' | 'system';

export interface ChatMessage {
  author: Author;
  text: string;
  timestamp: number;
  trace?: ChatTrace;
}

export interface RequestSettings {
  policy: 'argmax' | 'sample';
  temperature: number;
}

export type SendOutcome = 'ok' | 'empty' | 'busy' | 'rejected' | 'failed';

export class ConversationState {
  readonly messages: ChatMessage[] = [];
  inFlight = false;
  /** Inline validation text shown next to the input; empty when fine. */
  validationMessage = '';
  settings: RequestSettings = { policy: 'sample', temperature: 1.0 };

  private listeners: (() => void)[] = [];
  private lastFailedUtterance: string | null = null;

  constructor(
    private readonly api: ChatApi,
    readonly sessionId: string,
    private readonly now: () => number = () => Date.now(),
  ) {}

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  /** Send one utterance; the user message lands immediately, the bot
   * (or a system error) message lands when the request settles. */
  async send(text: string): Promise<SendOutcome> {
    const utterance = text.trim();
    if (!utterance) {
      this.validationMessage = 'Say something first.';
      this.notify();
      return 'empty';
    }
    if (this.inFlight) return 'busy';

    this.validationMessage = '';
    this.lastFailedUtterance = null;
    this.messages.push({ author: 'user', text: utterance, timestamp: this.now() });
    this.inFlight = true;
    this.notify();

    try {
      const body = await this.api.chat({
        session_id: this.sessionId,
        utterance,
        policy: this.settings.policy,
        temperature: this.settings.temperature,
      });
      this.messages.push({
        author: 'bot',
        text: body.response_text,
        timestamp: this.now(),
        trace: body.trace,
      });
      return 'ok';
    } catch (error) {
      if (error instanceof ApiError && error.status === 400) {
        this.validationMessage = 'The bot needs actual words to work with.';
        return 'rejected';
      }
      this.lastFailedUtterance = utterance;
      this.messages.push({
        author: 'system',
        text: 'The coach is unreachable right now - use retry to resend.',
        timestamp: this.now(),
      });
      return 'failed';
    } finally {
      this.inFlight = false;
      this.notify();
    }
  }

  /** Resend the utterance whose request failed, if any. */
  async retry(): Promise<SendOutcome> {
    if (this.lastFailedUtterance === null) return 'empty';
    const utterance = this.lastFailedUtterance;
    this.lastFailedUtterance = null;
    return this.send(utterance);
  }

  get canRetry(): boolean {
    return this.lastFailedUtterance !== null;
  }

  /** Update the selection policy for subsequent requests. Past messages
   * are untouched. Returns false (with inline validation) when the
   * temperature is not usable for sampling. */
  setPolicy(policy: 'argmax' | 'sample', temperature: number): boolean {
    if (!Number.isFinite(temperature) || temperature <= 0) {
      this.validationMessage = 'Temperature must be greater than zero.';
      this.notify();
      return false;
    }
    this.settings = { policy, temperature };
    this.validationMessage = '';
    this.notify();
    return true;
  }

  /** The trace row the server actually selected for a bot message. */
  selectedCandidate(message: ChatMessage): TraceCandidate | null {
    if (!message.trace) return null;
    return message.trace.candidates[message.trace.selected_index] ?? null;
  }
}

/** Session ids survive page reloads within a browser session. */
export function restoreSessionId(storage: Storage): string {
  const existing = storage.getItem('coachbot-session');
  if (existing) return existing;
  const fresh = `web-${Date.now().toString(36)}-${Math.random().toString(36).slice(2, 8)}`;
  storage.setItem('coachbot-session', fresh);
  return fresh;
}
