"""Template-based data-to-text bulletins over structured records.

A report run walks six stages: content selection (fresh records, most
recent per station), discourse ordering (fixed per-intent sort), text
structuring (one message spec per record), lexicalization (seeded
template choice), referring-expression generation (full form on first
mention, short form after), and realization (slot filling, casing,
punctuation, and the 280-character cap with a drop-last-sentence
overflow rule that also drops the sentence's record from the plan).

Numeric payload values appear verbatim in the realized text; template
choice is restricted to templates that mention every numeric slot the
record carries.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from random import Random
from string import Formatter
from typing import Any, Sequence

import yaml

from .datalake import StructuredRecord, parse_timestamp

MAX_CHARS = 280

INTENT_STREAMS = {
    "tide-bulletin": "tide",
    "weather-bulletin": "weather",
    "traffic-bulletin": "vessel-traffic",
    "news-digest": "news-headline",
}

INTENT_MESSAGE_TYPES = {
    "tide-bulletin": "tide-level",
    "weather-bulletin": "weather-obs",
    "traffic-bulletin": "traffic-obs",
    "news-digest": "news-item",
}


class ReporterError(Exception):
    pass


class MissingTemplateError(ReporterError):
    pass


@dataclass(frozen=True)
class MessageSpec:
    """One sentence-to-be: message type, slot values, station entity."""

    message_type: str
    station: str
    slots: dict[str, str]
    numeric_slots: tuple[str, ...]
    record: StructuredRecord


@dataclass
class ReportPlan:
    intent: str
    selected: list[StructuredRecord]
    ordered_messages: list[MessageSpec] = field(default_factory=list)
    realized: str | None = None


@dataclass
class TemplateLexicon:
    """Surface templates per message type plus referring forms per entity."""

    templates: dict[str, list[str]]
    referring_forms: dict[str, tuple[str, str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for message_type, variants in self.templates.items():
            if not variants:
                raise ReporterError(
                    f"message type {message_type!r} has no templates")

    def forms_for(self, entity: str) -> tuple[str, str]:
        return self.referring_forms.get(entity, (entity, entity))

    @classmethod
    def load(cls, path: str | Path) -> "TemplateLexicon":
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        refs = {}
        for entity, forms in (raw.get("referring_forms") or {}).items():
            refs[entity] = (str(forms.get("first", entity)),
                            str(forms.get("subsequent", entity)))
        return cls(templates={k: list(v)
                              for k, v in (raw.get("templates") or {}).items()},
                   referring_forms=refs)


def default_lexicon() -> TemplateLexicon:
    from importlib.resources import files

    path = files("maris").joinpath("data/report_templates.yaml")
    return TemplateLexicon.load(Path(str(path)))


def format_scalar(value: Any) -> str:
    """Render a payload scalar exactly: ints bare, floats via repr."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def select_content(records: Sequence[StructuredRecord], intent: str,
                   now: datetime | str,
                   freshness_hours: float = 24.0) -> list[StructuredRecord]:
    """Most recent record per station within the freshness window.

    Records outside the intent's stream or older than the window are
    dropped; the survivors come back sorted by station name.
    """
    if intent not in INTENT_STREAMS:
        raise ReporterError(f"unknown intent {intent!r}")
    stream = INTENT_STREAMS[intent]
    now_dt = parse_timestamp(now) if isinstance(now, str) else now
    if now_dt.tzinfo is None:
        now_dt = now_dt.replace(tzinfo=timezone.utc)
    cutoff = now_dt - timedelta(hours=freshness_hours)
    newest: dict[str, StructuredRecord] = {}
    for rec in records:
        if rec.stream != stream:
            continue
        ts = rec.observed_dt
        if ts < cutoff or ts > now_dt:
            continue
        current = newest.get(rec.station_or_region)
        if current is None or ts > current.observed_dt:
            newest[rec.station_or_region] = rec
    return [newest[station] for station in sorted(newest)]


def _structure(selection: Sequence[StructuredRecord],
               intent: str) -> list[MessageSpec]:
    """Stages 2+3: fixed discourse order, then one message per record."""
    message_type = INTENT_MESSAGE_TYPES[intent]
    ordered = sorted(selection,
                     key=lambda r: (r.station_or_region, r.observed_dt))
    specs = []
    for rec in ordered:
        slots: dict[str, str] = {
            "time": rec.observed_dt.strftime("%H:%M"),
        }
        numeric: list[str] = []
        for name, value in rec.payload.items():
            slots[name] = format_scalar(value)
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                numeric.append(name)
        specs.append(MessageSpec(message_type=message_type,
                                 station=rec.station_or_region, slots=slots,
                                 numeric_slots=tuple(sorted(numeric)),
                                 record=rec))
    return specs


def _template_slots(template: str) -> set[str]:
    return {name for _, name, _, _ in Formatter().parse(template)
            if name is not None}


def _eligible_templates(spec: MessageSpec,
                        lexicon: TemplateLexicon) -> list[str]:
    variants = lexicon.templates.get(spec.message_type)
    if not variants:
        raise MissingTemplateError(
            f"no templates for message type {spec.message_type!r}")
    available = set(spec.slots) | {"station"}
    required = set(spec.numeric_slots)
    eligible = [t for t in variants
                if _template_slots(t) <= available
                and required <= _template_slots(t)]
    if not eligible:
        raise MissingTemplateError(
            f"no template for {spec.message_type!r} covers slots "
            f"{sorted(required)} with only {sorted(available)} available")
    return eligible


def generate_report(selection: Sequence[StructuredRecord], intent: str,
                    lexicon: TemplateLexicon, seed: int = 0,
                    max_chars: int = MAX_CHARS) -> ReportPlan:
    """Stages 2..6 for an already-selected record list.

    Deterministic for a given (selection, lexicon, seed). The realized
    text never exceeds `max_chars`; sentences (and their records) are
    dropped from the end when it would.
    """
    if not selection:
        raise ReporterError("generate_report needs a non-empty selection")
    specs = _structure(selection, intent)
    rng = Random(seed)

    sentences: list[str] = []
    mentioned: set[str] = set()
    for spec in specs:
        template = rng.choice(_eligible_templates(spec, lexicon))
        first, subsequent = lexicon.forms_for(spec.station)
        station_form = subsequent if spec.station in mentioned else first
        mentioned.add(spec.station)
        values = dict(spec.slots)
        values["station"] = station_form
        sentence = template.format(**values)
        sentence = sentence[:1].upper() + sentence[1:]
        if sentence and sentence[-1] not in ".!?":
            sentence += "."
        sentences.append(sentence)

    kept = len(sentences)
    while kept > 0 and len(" ".join(sentences[:kept])) > max_chars:
        kept -= 1
    realized = " ".join(sentences[:kept])
    return ReportPlan(intent=intent,
                      selected=[s.record for s in specs[:kept]],
                      ordered_messages=specs[:kept], realized=realized)


class OutboxPublisher:
    """Append-only file outbox standing in for a social-network client.

    Each publish appends one JSON line with a monotonically increasing
    receipt id; appends are serialized by a lock.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._next_id = self._scan_next_id()

    def _scan_next_id(self) -> int:
        if not self.path.exists():
            return 1
        last = 0
        for line in self.path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                last = max(last, int(json.loads(line)["receipt_id"]))
        return last + 1

    def publish(self, text: str, provenance: list[dict[str, Any]]) -> int:
        with self._lock:
            receipt_id = self._next_id
            self._next_id += 1
            entry = {"receipt_id": receipt_id,
                     "timestamp": datetime.now(timezone.utc).isoformat(),
                     "text": text, "provenance": provenance}
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(json.dumps(entry, ensure_ascii=False) + "\n")
        return receipt_id


def publish(plan: ReportPlan, publisher: OutboxPublisher,
            max_chars: int = MAX_CHARS) -> int:
    """Hand the realized plan to the publisher; returns the receipt id."""
    if plan.realized is None:
        raise ReporterError("plan has not been realized yet")
    if len(plan.realized) > max_chars:
        raise ReporterError(
            f"realized text is {len(plan.realized)} chars, cap is {max_chars}")
    provenance = [{"stream": rec.stream, "station": rec.station_or_region,
                   "observed_at": rec.observed_at}
                  for rec in plan.selected]
    return publisher.publish(plan.realized, provenance)
