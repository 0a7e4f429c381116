/**
 * Application controller: owns the page state, talks to the chat
 * service through a ChatClient, and produces the page tree on demand.
 *
 * Network events mutate state strictly in arrival order (one send at a
 * time is awaited); the tree is rebuilt from state on every change, so
 * what is rendered is always a pure function of the protocol history.
 */

import { VNode } from "./dom.js";
import { currentLocale, LocaleTag, switchLocale } from "./i18n.js";
import { ChatClient, WikiEntry, WireMessage } from "./protocol.js";
import { PageState, renderChatPage } from "./views.js";

export class ChatApp {
  state: PageState;
  sessionId: string | null = null;
  onChange: () => void = () => {};

  constructor(readonly client: ChatClient) {
    this.state = {
      history: [],
      offline: false,
      quoting: null,
      locale: currentLocale(),
      wikiEntries: [],
      wikiSelected: null,
      wikiAxis: "",
    };
  }

  private changed(): void {
    this.onChange();
  }

  async init(): Promise<void> {
    try {
      this.sessionId = await this.client.openSession(this.state.locale);
      this.state.wikiEntries = await this.client.listWiki();
      this.state.offline = false;
    } catch {
      this.state.offline = true;
    }
    this.changed();
  }

  /** Send composed text; the user message lands in the history
   * immediately, the bot reply as soon as the service answers. */
  async send(body: string): Promise<void> {
    if (!body.trim() || this.state.offline || this.sessionId === null) {
      return;
    }
    const quoted = this.state.quoting?.message_id;
    const pending: WireMessage = {
      session_id: this.sessionId,
      message_id: "pending",
      timestamp: new Date().toISOString(),
      type: "text",
      body,
      sender: "user",
      quoted_message_id: quoted ?? null,
      sources: [],
    };
    this.state.history = [...this.state.history, pending];
    this.state.quoting = null;
    this.changed();
    try {
      await this.client.sendMessage(this.sessionId, body, quoted);
      this.state.history = await this.client.fetchHistory(this.sessionId);
      this.changed();
    } catch {
      this.state.history = this.state.history.filter((m) => m !== pending);
      await this.goOffline();
    }
  }

  /** Offline mode: banner on, composer disabled, reconnect with the
   * client's backoff until the service answers again. */
  private async goOffline(): Promise<void> {
    this.state.offline = true;
    this.changed();
    try {
      await this.client.health();
      if (this.sessionId !== null) {
        this.state.history = await this.client.fetchHistory(this.sessionId);
      }
      this.state.offline = false;
      this.changed();
    } catch {
      // Still down after the retry budget; stay offline.
      this.changed();
    }
  }

  quote(messageId: string): void {
    const message = this.state.history.find(
      (m) => m.message_id === messageId,
    );
    this.state.quoting = message ?? null;
    this.changed();
  }

  cancelQuote(): void {
    this.state.quoting = null;
    this.changed();
  }

  setLocale(tag: string): void {
    const applied = switchLocale(tag);
    this.state.locale = applied as LocaleTag;
    this.changed();
  }

  async setWikiAxis(axis: string): Promise<void> {
    this.state.wikiAxis = axis;
    try {
      this.state.wikiEntries = await this.client.listWiki(
        axis === "" ? undefined : axis,
      );
    } catch {
      await this.goOffline();
      return;
    }
    this.changed();
  }

  async openWiki(slug: string): Promise<void> {
    try {
      this.state.wikiSelected = await this.client.getWiki(slug);
    } catch {
      await this.goOffline();
      return;
    }
    this.changed();
  }

  render(): VNode {
    return renderChatPage(this.state, {
      onSubmit: (event) => {
        event.preventDefault();
        const form = event.target as HTMLFormElement | null;
        const input = form?.querySelector?.(
          "#composer-input",
        ) as HTMLInputElement | null;
        if (input) {
          const value = input.value;
          input.value = "";
          void this.send(value);
        }
      },
      onQuote: (messageId) => this.quote(messageId),
      onCancelQuote: () => this.cancelQuote(),
      onLocaleChange: (event) => {
        const select = event.target as HTMLSelectElement | null;
        if (select) this.setLocale(select.value);
      },
      onAxisChange: (event) => {
        const select = event.target as HTMLSelectElement | null;
        if (select) void this.setWikiAxis(select.value);
      },
      onOpenWiki: (slug) => void this.openWiki(slug),
    });
  }
}
