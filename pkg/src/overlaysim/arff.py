"""The global log file dialect: @relation/@attribute/@data with nominal domains.

Layout is fixed: SuperPeer, Query, componentW1..componentW_A, Peer. The writer
emits comma-space separated values; the reader tolerates arbitrary whitespace,
blank lines, '%' comments and attribute domains wrapped over several lines.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .dtree import TrainingRecord
from .errors import ArityMismatch, ParseError, ValueNotInDomain

DEFAULT_RELATION = "P2P-BD"


class LogRecord(NamedTuple):
    answering_sp: str
    query: str
    components: tuple[str, ...]
    answering_peer: str


@dataclass(frozen=True)
class ArffSchema:
    relation: str
    attributes: tuple[tuple[str, tuple[str, ...]], ...]

    @property
    def arity(self) -> int:
        return len(self.attributes) - 3


def _expected_names(arity: int) -> list[str]:
    return ["SuperPeer", "Query"] + [f"componentW{i + 1}" for i in range(arity)] + ["Peer"]


def schema_from_records(records: Iterable[LogRecord],
                        relation: str = DEFAULT_RELATION) -> ArffSchema:
    """Build the schema whose domains list record values in order of first use."""
    records = list(records)
    if not records:
        raise ArityMismatch("cannot infer a schema from zero records")
    arity = len(records[0].components)
    domains: list[dict[str, None]] = [{} for _ in range(arity + 3)]
    for record in records:
        if len(record.components) != arity:
            raise ArityMismatch(
                f"record {record.query} has {len(record.components)} components, expected {arity}"
            )
        for column, value in zip(domains, _record_fields(record)):
            column.setdefault(value)
    names = _expected_names(arity)
    return ArffSchema(
        relation=relation,
        attributes=tuple((name, tuple(column)) for name, column in zip(names, domains)),
    )


def _record_fields(record: LogRecord) -> tuple[str, ...]:
    return (record.answering_sp, record.query, *record.components, record.answering_peer)


def write_arff(schema: ArffSchema, records: Iterable[LogRecord]) -> str:
    """Serialise records under the schema; every value must be in its domain."""
    lines = [f"@relation {schema.relation}"]
    for name, domain in schema.attributes:
        lines.append(f"@attribute {name} {{{', '.join(domain)}}}")
    lines.append("@data")

    domain_sets = [frozenset(domain) for _, domain in schema.attributes]
    arity = schema.arity
    for record in records:
        fields = _record_fields(record)
        if len(fields) != len(schema.attributes):
            raise ArityMismatch(
                f"record {record.query} has {len(record.components)} components, expected {arity}"
            )
        for (name, _), allowed, value in zip(schema.attributes, domain_sets, fields):
            if value not in allowed:
                raise ValueNotInDomain(f"{value!r} not in domain of attribute {name}")
        lines.append(", ".join(fields))
    return "\n".join(lines) + "\n"


def _logical_lines(text: str):
    """Strip comments/blanks and join attribute domains split across lines."""
    pending = ""
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if pending:
            line = pending + " " + line
            pending = ""
        if line.lower().startswith("@attribute") and "{" in line and "}" not in line:
            pending = line
            continue
        yield line
    if pending:
        raise ParseError(f"unterminated attribute domain: {pending[:60]}...")


def read_arff(text: str) -> tuple[ArffSchema, list[LogRecord]]:
    relation = None
    attributes: list[tuple[str, tuple[str, ...]]] = []
    records: list[LogRecord] = []
    domain_sets: list[frozenset[str]] = []
    in_data = False

    for line in _logical_lines(text):
        lowered = line.lower()
        if not in_data and lowered.startswith("@relation"):
            parts = line.split(None, 1)
            if len(parts) != 2:
                raise ParseError("@relation without a name")
            relation = parts[1].strip()
        elif not in_data and lowered.startswith("@attribute"):
            attributes.append(_parse_attribute(line))
        elif lowered == "@data":
            if relation is None or not attributes:
                raise ParseError("@data before @relation/@attribute directives")
            _check_layout(attributes)
            domain_sets = [frozenset(domain) for _, domain in attributes]
            in_data = True
        elif in_data:
            records.append(_parse_row(line, attributes, domain_sets))
        else:
            raise ParseError(f"unexpected line outside @data: {line[:60]!r}")

    if not in_data:
        raise ParseError("missing @data directive")
    return ArffSchema(relation=relation, attributes=tuple(attributes)), records


def _parse_attribute(line: str) -> tuple[str, tuple[str, ...]]:
    body = line.split(None, 1)
    if len(body) != 2:
        raise ParseError("@attribute without a name")
    rest = body[1].strip()
    brace = rest.find("{")
    if brace < 0 or not rest.endswith("}"):
        raise ParseError(f"attribute without a nominal domain: {line[:60]!r}")
    name = rest[:brace].strip()
    if not name:
        raise ParseError("attribute with an empty name")
    values = tuple(v.strip() for v in rest[brace + 1:-1].split(",") if v.strip())
    if not values:
        raise ParseError(f"attribute {name} has an empty domain")
    return name, values


def _check_layout(attributes: list[tuple[str, tuple[str, ...]]]) -> None:
    names = [name for name, _ in attributes]
    if len(names) < 4 or names != _expected_names(len(names) - 3):
        raise ParseError(f"unexpected attribute layout: {names}")


def _parse_row(line: str, attributes, domain_sets) -> LogRecord:
    fields = [f.strip() for f in line.split(",")]
    if len(fields) != len(attributes):
        raise ArityMismatch(
            f"row has {len(fields)} fields, schema has {len(attributes)} attributes"
        )
    for (name, _), allowed, value in zip(attributes, domain_sets, fields):
        if value not in allowed:
            raise ValueNotInDomain(f"{value!r} not in domain of attribute {name}")
    return LogRecord(
        answering_sp=fields[0],
        query=fields[1],
        components=tuple(fields[2:-1]),
        answering_peer=fields[-1],
    )


def records_to_training(records: Iterable[LogRecord]) -> list[TrainingRecord]:
    """Features are the query components, the class is the answering super-peer."""
    return [TrainingRecord(features=r.components, class_label=r.answering_sp) for r in records]
