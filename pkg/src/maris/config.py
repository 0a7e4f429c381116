"""Platform configuration: defaults, YAML file loading, env overrides.

All tunables the modules consume (ranking parameters, thresholds,
freshness windows, stream schemas, server ports, locales) live here so
a single YAML file can reconfigure a deployment. Environment variables
``MARIS_HTTP_PORT``, ``MARIS_LINE_PORT`` and ``MARIS_LAKE`` override the
server ports and the data-lake path.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

SUPPORTED_LOCALES = ("pt", "en")

REFUSAL_MESSAGES = {
    "en": "I could not find a reliable answer to that in my sources.",
    "pt": "Não encontrei uma resposta confiável para isso em minhas fontes.",
}

UNSUPPORTED_TYPE_MESSAGES = {
    "en": "Sorry, I can only handle text messages for now.",
    "pt": "Desculpe, por enquanto só consigo tratar mensagens de texto.",
}

# Cue words that mark a question as database-type (aggregation/listing).
SQL_CUE_WORDS = {
    "en": ["how many", "list", "average", "maximum", "minimum", "total"],
    "pt": ["quantos", "quantas", "liste", "listar", "média", "máximo",
           "máxima", "mínimo", "mínima", "total"],
}

# Prepositions that may introduce a WHERE literal ("of/in/for <entity>").
WHERE_PREPOSITIONS = ["of", "in", "for", "at", "de", "da", "do", "em",
                      "no", "na", "para"]

# Verb lexicon for subject-verb-object triple extraction (3rd person
# singular and base forms, plus Portuguese equivalents).
SVO_VERBS = [
    "border", "borders", "carries", "carry", "contain", "contains",
    "cover", "covers", "export", "exports", "generate", "generates",
    "hold", "holds", "host", "hosts", "import", "imports", "monitor",
    "monitors", "produce", "produces", "protect", "protects", "provide",
    "provides", "regulate", "regulates", "store", "stores", "supplies",
    "supply", "support", "supports", "sustain", "sustains", "threaten",
    "threatens",
    "abriga", "contém", "cobre", "exporta", "produz", "protege", "regula",
    "sustenta",
]

# Per-stream payload schemas for structured records. Field types:
# "number" (int or float) or "text".
STREAM_SCHEMAS: dict[str, dict[str, dict[str, Any]]] = {
    "tide": {
        "height_m": {"type": "number", "required": True, "unit": "m"},
    },
    "weather": {
        "air_temp_c": {"type": "number", "required": True, "unit": "degC"},
        "wind_speed_kt": {"type": "number", "required": False, "unit": "kt"},
    },
    "vessel-traffic": {
        "vessels_in_transit": {"type": "number", "required": True},
        "vessels_anchored": {"type": "number", "required": False},
    },
    "news-headline": {
        "headline": {"type": "text", "required": True},
    },
}


@dataclass
class RetrieverConfig:
    k: int = 5                  # retrieval depth
    k1: float = 1.2
    b: float = 0.75
    stopwords: list[str] = field(default_factory=list)


@dataclass
class QaConfig:
    retrieval_threshold: float = 1.0   # min top BM25 score to answer
    reader_threshold: float = 0.05     # min sentence similarity to answer
    likert_threshold: int = 3          # rating >= threshold means answerable


@dataclass
class KgConfig:
    synonym_threshold: float = 0.85
    link_threshold: float = 0.80
    verbs: list[str] = field(default_factory=lambda: list(SVO_VERBS))
    embedding_dim: int = 64
    window: int = 4


@dataclass
class ReporterConfig:
    freshness_hours: float = 24.0
    max_chars: int = 280


@dataclass
class ServerConfig:
    http_port: int = 8080
    line_port: int = 9700
    host: str = "127.0.0.1"


@dataclass
class AppConfig:
    locales: tuple[str, ...] = SUPPORTED_LOCALES
    lake_path: str = "lake"
    retriever: RetrieverConfig = field(default_factory=RetrieverConfig)
    qa: QaConfig = field(default_factory=QaConfig)
    kg: KgConfig = field(default_factory=KgConfig)
    reporter: ReporterConfig = field(default_factory=ReporterConfig)
    server: ServerConfig = field(default_factory=ServerConfig)
    sql_cues: dict[str, list[str]] = field(
        default_factory=lambda: {k: list(v) for k, v in SQL_CUE_WORDS.items()})
    where_prepositions: list[str] = field(
        default_factory=lambda: list(WHERE_PREPOSITIONS))
    stream_schemas: dict[str, dict[str, dict[str, Any]]] = field(
        default_factory=lambda: {s: dict(f) for s, f in STREAM_SCHEMAS.items()})

    def refusal_message(self, locale: str = "en") -> str:
        return REFUSAL_MESSAGES.get(locale, REFUSAL_MESSAGES["en"])

    def unsupported_type_message(self, locale: str = "en") -> str:
        return UNSUPPORTED_TYPE_MESSAGES.get(
            locale, UNSUPPORTED_TYPE_MESSAGES["en"])


def _apply(section: Any, values: dict[str, Any]) -> None:
    for key, value in values.items():
        if hasattr(section, key):
            setattr(section, key, value)


def load_config(path: str | Path | None = None) -> AppConfig:
    """Build an AppConfig from defaults, an optional YAML file, and env vars.

    Unknown YAML keys are ignored; env overrides win over the file.
    """
    cfg = AppConfig()
    if path is not None:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        for name in ("retriever", "qa", "kg", "reporter", "server"):
            if isinstance(raw.get(name), dict):
                _apply(getattr(cfg, name), raw[name])
        if "locales" in raw:
            cfg.locales = tuple(raw["locales"])
        if "lake_path" in raw:
            cfg.lake_path = str(raw["lake_path"])
        if isinstance(raw.get("sql_cues"), dict):
            cfg.sql_cues.update(raw["sql_cues"])
        if "where_prepositions" in raw:
            cfg.where_prepositions = list(raw["where_prepositions"])
        if isinstance(raw.get("stream_schemas"), dict):
            cfg.stream_schemas.update(raw["stream_schemas"])

    if os.environ.get("MARIS_HTTP_PORT"):
        cfg.server.http_port = int(os.environ["MARIS_HTTP_PORT"])
    if os.environ.get("MARIS_LINE_PORT"):
        cfg.server.line_port = int(os.environ["MARIS_LINE_PORT"])
    if os.environ.get("MARIS_LAKE"):
        cfg.lake_path = os.environ["MARIS_LAKE"]
    return cfg
