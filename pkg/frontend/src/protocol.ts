/**
 * Client for the chat service's HTTP mirror.
 *
 * The wire schema mirrors the line protocol one to one: the same
 * message envelope comes back from send-message and fetch-history.
 * Transient network failures are retried with exponential backoff;
 * after the retry budget the call rejects so the UI can flip to its
 * offline state.
 */

export interface SourceRef {
  origin_name: string;
  origin_url_or_citation: string;
  retrieved_at: string;
}

export interface WireMessage {
  session_id: string;
  message_id: string;
  timestamp: string;
  type: "text" | "attachment-ref" | "voice-ref";
  body: string;
  sender: "user" | "bot";
  quoted_message_id: string | null;
  sources: SourceRef[];
}

export interface WikiEntry {
  slug: string;
  title: string;
  axis: string;
  body: string;
}

export interface SendResult {
  user_message: WireMessage;
  bot_message: WireMessage;
}

export type FetchLike = (
  url: string,
  init?: {
    method?: string;
    headers?: Record<string, string>;
    body?: string;
  },
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export interface ClientOptions {
  fetchLike?: FetchLike;
  sleep?: (ms: number) => Promise<void>;
  retries?: number;
  backoffMs?: number;
}

export class ProtocolError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

const defaultSleep = (ms: number) =>
  new Promise<void>((resolve) => setTimeout(resolve, ms));

export class ChatClient {
  private fetchLike: FetchLike;
  private sleep: (ms: number) => Promise<void>;
  private retries: number;
  private backoffMs: number;

  constructor(
    readonly baseUrl: string,
    options: ClientOptions = {},
  ) {
    this.fetchLike = options.fetchLike ?? (fetch as unknown as FetchLike);
    this.sleep = options.sleep ?? defaultSleep;
    this.retries = options.retries ?? 3;
    this.backoffMs = options.backoffMs ?? 500;
  }

  /** POST/GET with exponential backoff on network errors (not on 4xx). */
  private async call<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    let attempt = 0;
    for (;;) {
      try {
        const response = await this.fetchLike(this.baseUrl + path, {
          method,
          headers: body === undefined
            ? undefined
            : { "content-type": "application/json" },
          body: body === undefined ? undefined : JSON.stringify(body),
        });
        if (!response.ok) {
          const detail = await response
            .json()
            .then((d) => JSON.stringify(d))
            .catch(() => "");
          throw new ProtocolError(
            `${method} ${path} failed: ${response.status} ${detail}`,
            response.status,
          );
        }
        return (await response.json()) as T;
      } catch (error) {
        if (error instanceof ProtocolError) throw error; // server said no
        if (attempt >= this.retries) throw error;
        await this.sleep(this.backoffMs * 2 ** attempt);
        attempt += 1;
      }
    }
  }

  async openSession(locale: string): Promise<string> {
    const frame = await this.call<{ session_id: string }>(
      "POST",
      "/sessions",
      { locale },
    );
    return frame.session_id;
  }

  async sendMessage(
    sessionId: string,
    body: string,
    quotedMessageId?: string,
  ): Promise<SendResult> {
    return this.call<SendResult>(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/messages`,
      { body, type: "text", quoted_message_id: quotedMessageId ?? null },
    );
  }

  async fetchHistory(sessionId: string): Promise<WireMessage[]> {
    const frame = await this.call<{ messages: WireMessage[] }>(
      "GET",
      `/sessions/${encodeURIComponent(sessionId)}/history`,
    );
    return frame.messages;
  }

  async listWiki(axis?: string): Promise<WikiEntry[]> {
    const suffix = axis ? `?axis=${encodeURIComponent(axis)}` : "";
    const frame = await this.call<{ entries: WikiEntry[] }>(
      "GET",
      `/wiki${suffix}`,
    );
    return frame.entries;
  }

  async getWiki(slug: string): Promise<WikiEntry> {
    const frame = await this.call<{ entry: WikiEntry }>(
      "GET",
      `/wiki/${encodeURIComponent(slug)}`,
    );
    return frame.entry;
  }

  async health(): Promise<{ status: string }> {
    return this.call<{ status: string }>("GET", "/health");
  }
}
