/**
 * Pure view builders: protocol history in, element tree out.
 *
 * Rendering never touches network or global state, so the same
 * history always yields the same tree (and the same DOM order).
 */

import { el, VNode } from "./dom.js";
import { LocaleTag, t } from "./i18n.js";
import { SourceRef, WikiEntry, WireMessage } from "./protocol.js";

export interface MessageView {
  message: WireMessage;
  renderedTime: string;
  quotedPreview: string | null; // null = nothing quoted
  quotedMissing: boolean;
  sources: SourceRef[];
}

const QUOTE_PREVIEW_CHARS = 80;

function intlTag(locale: LocaleTag): string {
  return locale === "pt" ? "pt-BR" : "en-US";
}

export function renderTimestamp(iso: string, locale: LocaleTag): string {
  const parsed = new Date(iso);
  if (Number.isNaN(parsed.getTime())) return iso;
  return new Intl.DateTimeFormat(intlTag(locale), {
    hour: "2-digit",
    minute: "2-digit",
    timeZone: "UTC",
  }).format(parsed);
}

/** Resolve one protocol message against the history it belongs to. */
export function toMessageView(
  message: WireMessage,
  history: WireMessage[],
  locale: LocaleTag,
): MessageView {
  let quotedPreview: string | null = null;
  let quotedMissing = false;
  if (message.quoted_message_id) {
    const index = history.indexOf(message);
    const earlier = index >= 0 ? history.slice(0, index) : history;
    const quoted = earlier.find(
      (m) => m.message_id === message.quoted_message_id,
    );
    if (quoted) {
      quotedPreview = quoted.body.slice(0, QUOTE_PREVIEW_CHARS);
    } else {
      quotedPreview = t("message.quoted.missing", locale);
      quotedMissing = true;
    }
  }
  return {
    message,
    renderedTime: renderTimestamp(message.timestamp, locale),
    quotedPreview,
    quotedMissing,
    sources: message.sources ?? [],
  };
}

function renderSources(sources: SourceRef[], locale: LocaleTag): VNode {
  return el(
    "ul",
    { class: "sources", "aria-label": t("message.sources", locale) },
    ...sources.map((source) =>
      el(
        "li",
        {},
        source.origin_url_or_citation.startsWith("http")
          ? el(
              "a",
              { href: source.origin_url_or_citation, rel: "noopener" },
              source.origin_name,
            )
          : el(
              "span",
              {},
              source.origin_url_or_citation
                ? `${source.origin_name} (${source.origin_url_or_citation})`
                : source.origin_name,
            ),
      ),
    ),
  );
}

export function renderMessage(
  view: MessageView,
  locale: LocaleTag,
  onQuote?: (messageId: string) => void,
): VNode {
  const message = view.message;
  const who =
    message.sender === "bot" ? t("message.bot", locale) : t("message.you", locale);
  const body =
    message.type === "text" ? message.body : t("banner.unsupported", locale);
  return el(
    "li",
    {
      class: `message ${message.sender}`,
      "data-message-id": message.message_id,
    },
    el(
      "article",
      {},
      el(
        "header",
        {},
        el("span", { class: "sender" }, who),
        el(
          "time",
          { datetime: message.timestamp, class: "timestamp" },
          view.renderedTime,
        ),
      ),
      view.quotedPreview !== null
        ? el(
            "blockquote",
            {
              class: view.quotedMissing ? "quoted missing" : "quoted",
              "data-quoted-id": message.quoted_message_id ?? "",
            },
            `${t("message.quoted", locale)}: ${view.quotedPreview}`,
          )
        : null,
      el("p", { class: "body" }, body),
      view.sources.length > 0 ? renderSources(view.sources, locale) : null,
      onQuote
        ? el(
            "button",
            {
              type: "button",
              class: "quote-button",
              "aria-label": `${t("message.quote", locale)} ${message.message_id}`,
              onclick: () => onQuote(message.message_id),
            },
            t("message.quote", locale),
          )
        : null,
    ),
  );
}

/** History list: a pure function of the fetched protocol history. */
export function renderHistory(
  history: WireMessage[],
  locale: LocaleTag,
  onQuote?: (messageId: string) => void,
): VNode {
  if (history.length === 0) {
    return el("p", { class: "empty" }, t("history.empty", locale));
  }
  return el(
    "ol",
    { class: "history", "aria-label": t("history.label", locale) },
    ...history.map((message) =>
      renderMessage(toMessageView(message, history, locale), locale, onQuote),
    ),
  );
}

export interface ComposerState {
  offline: boolean;
  quoting: WireMessage | null;
}

export function renderComposer(
  state: ComposerState,
  locale: LocaleTag,
  handlers: {
    onSubmit?: (event: Event) => void;
    onCancelQuote?: () => void;
  } = {},
): VNode {
  const disabled = state.offline ? "true" : undefined;
  return el(
    "form",
    { class: "composer", onsubmit: handlers.onSubmit },
    state.quoting
      ? el(
          "p",
          { class: "quote-indicator" },
          `${t("message.quoted", locale)}: ${state.quoting.body.slice(0, QUOTE_PREVIEW_CHARS)} `,
          el(
            "button",
            {
              type: "button",
              "aria-label": "cancel quote",
              onclick: () => handlers.onCancelQuote?.(),
            },
            "×",
          ),
        )
      : null,
    el(
      "label",
      { for: "composer-input", class: "visually-hidden" },
      t("composer.label", locale),
    ),
    el("input", {
      id: "composer-input",
      name: "body",
      type: "text",
      placeholder: t("composer.placeholder", locale),
      autocomplete: "off",
      ...(disabled ? { disabled } : {}),
    }),
    el(
      "button",
      { type: "submit", ...(disabled ? { disabled } : {}) },
      t("composer.send", locale),
    ),
  );
}

export const WIKI_AXES = [
  "socio-environmental",
  "biodiversity",
  "physicochemical",
  "legislation-and-governance",
];

export function renderWikiPane(
  entries: WikiEntry[],
  selected: WikiEntry | null,
  axis: string,
  locale: LocaleTag,
  handlers: {
    onAxisChange?: (event: Event) => void;
    onOpen?: (slug: string) => void;
  } = {},
): VNode {
  return el(
    "aside",
    { class: "wiki" },
    el("h2", {}, t("wiki.title", locale)),
    el("label", { for: "axis-select" }, t("wiki.axis", locale)),
    el(
      "select",
      { id: "axis-select", onchange: handlers.onAxisChange },
      el("option", { value: "", ...(axis === "" ? { selected: "" } : {}) },
        t("wiki.all", locale)),
      ...WIKI_AXES.map((value) =>
        el(
          "option",
          { value, ...(axis === value ? { selected: "" } : {}) },
          value,
        ),
      ),
    ),
    el(
      "ul",
      { class: "wiki-list", "aria-label": t("wiki.label", locale) },
      ...entries.map((entry) =>
        el(
          "li",
          {},
          el(
            "button",
            {
              type: "button",
              class: "wiki-open",
              "data-slug": entry.slug,
              "aria-label": `${t("wiki.open", locale)}: ${entry.title}`,
              onclick: () => handlers.onOpen?.(entry.slug),
            },
            entry.title,
          ),
        ),
      ),
    ),
    selected
      ? el(
          "article",
          { class: "wiki-body", "aria-label": selected.title },
          el("h3", {}, selected.title),
          el("p", { class: "wiki-axis" }, selected.axis),
          el("pre", { class: "wiki-text" }, selected.body),
        )
      : null,
  );
}

export interface PageState {
  history: WireMessage[];
  offline: boolean;
  quoting: WireMessage | null;
  locale: LocaleTag;
  wikiEntries: WikiEntry[];
  wikiSelected: WikiEntry | null;
  wikiAxis: string;
}

export function renderChatPage(
  state: PageState,
  handlers: {
    onSubmit?: (event: Event) => void;
    onQuote?: (messageId: string) => void;
    onCancelQuote?: () => void;
    onLocaleChange?: (event: Event) => void;
    onAxisChange?: (event: Event) => void;
    onOpenWiki?: (slug: string) => void;
  } = {},
): VNode {
  const locale = state.locale;
  return el(
    "main",
    { class: "chat-page" },
    el(
      "header",
      { class: "page-header" },
      el("img", {
        src: "wave-logo.svg",
        alt: "Stylized ocean wave logo",
        class: "logo",
        width: "40",
        height: "40",
      }),
      el("h1", {}, t("app.title", locale)),
      el(
        "span",
        { class: "locale-switch" },
        el("label", { for: "locale-select" }, t("locale.label", locale)),
        el(
          "select",
          { id: "locale-select", onchange: handlers.onLocaleChange },
          el("option", { value: "pt", ...(locale === "pt" ? { selected: "" } : {}) }, "Português"),
          el("option", { value: "en", ...(locale === "en" ? { selected: "" } : {}) }, "English"),
        ),
      ),
    ),
    state.offline
      ? el(
          "p",
          { class: "banner offline", role: "status" },
          t("banner.offline", locale),
        )
      : null,
    el(
      "section",
      { class: "conversation" },
      renderHistory(state.history, locale, handlers.onQuote),
      renderComposer(
        { offline: state.offline, quoting: state.quoting },
        locale,
        {
          onSubmit: handlers.onSubmit,
          onCancelQuote: handlers.onCancelQuote,
        },
      ),
    ),
    renderWikiPane(state.wikiEntries, state.wikiSelected, state.wikiAxis,
                   locale, {
      onAxisChange: handlers.onAxisChange,
      onOpen: handlers.onOpenWiki,
    }),
  );
}
