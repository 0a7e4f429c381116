/**
 * Chrome-string catalogs. Message bodies are never translated; only
 * interface strings go through `t`. Unknown locales are ignored with a
 * console warning; a key missing from the active catalog falls back to
 * the default locale (en).
 */

export type LocaleTag = "pt" | "en";

export interface Catalog {
  [key: string]: string;
}

const en: Catalog = {
  "app.title": "Blue Amazon knowledge service",
  "app.tagline": "Ask, browse, learn about the sea.",
  "composer.placeholder": "Ask something about the Blue Amazon...",
  "composer.send": "Send",
  "composer.label": "Message to send",
  "banner.offline": "Connection lost. Reconnecting...",
  "banner.unsupported": "This message type is not supported yet.",
  "history.empty": "No messages yet. Ask your first question!",
  "history.label": "Conversation history",
  "message.you": "You",
  "message.bot": "Assistant",
  "message.sources": "Sources",
  "message.quote": "Quote",
  "message.quoted": "In reply to",
  "message.quoted.missing": "(reference to a deleted message)",
  "locale.label": "Language",
  "wiki.title": "Wiki",
  "wiki.axis": "Axis",
  "wiki.all": "All axes",
  "wiki.open": "Open entry",
  "wiki.label": "Wiki entries",
};

const pt: Catalog = {
  "app.title": "Serviço de conhecimento da Amazônia Azul",
  "composer.placeholder": "Pergunte algo sobre a Amazônia Azul...",
  "composer.send": "Enviar",
  "composer.label": "Mensagem a enviar",
  "banner.offline": "Conexão perdida. Reconectando...",
  "banner.unsupported": "Este tipo de mensagem ainda não é suportado.",
  "history.empty": "Nenhuma mensagem ainda. Faça sua primeira pergunta!",
  "history.label": "Histórico da conversa",
  "message.you": "Você",
  "message.bot": "Assistente",
  "message.sources": "Fontes",
  "message.quote": "Citar",
  "message.quoted": "Em resposta a",
  "message.quoted.missing": "(referência a uma mensagem apagada)",
  "locale.label": "Idioma",
  "wiki.title": "Wiki",
  "wiki.axis": "Eixo",
  "wiki.all": "Todos os eixos",
  "wiki.open": "Abrir verbete",
  "wiki.label": "Verbetes da wiki",
};

const catalogs: Record<LocaleTag, Catalog> = { en, pt };

export const DEFAULT_LOCALE: LocaleTag = "en";

let active: LocaleTag = DEFAULT_LOCALE;

export function currentLocale(): LocaleTag {
  return active;
}

export function availableLocales(): LocaleTag[] {
  return Object.keys(catalogs) as LocaleTag[];
}

/** Switch the chrome language; unknown tags are a warning-only no-op. */
export function switchLocale(tag: string): LocaleTag {
  if (tag in catalogs) {
    active = tag as LocaleTag;
  } else {
    console.warn(`unknown locale tag ${JSON.stringify(tag)}; keeping`, active);
  }
  return active;
}

export function t(key: string, locale?: LocaleTag): string {
  const tag = locale ?? active;
  const hit = catalogs[tag][key];
  if (hit !== undefined) return hit;
  const fallback = catalogs[DEFAULT_LOCALE][key];
  if (fallback !== undefined) return fallback;
  console.warn(`missing i18n key ${JSON.stringify(key)}`);
  return key;
}
