# core/events.py
"""
Ingestion of infection-event logs.

The CSV dialect is `sender_id,recipient_id,timestamp` with a required header.
An empty sender marks a seed. Timestamps are epoch seconds or RFC 3339, auto
detected per file. Lines starting with `#` before the header are comments and
are kept on the log (the simulator records its parameters there). After the
header every line is a record, so actor ids may start with `#`.
"""
import csv
import io
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence, Tuple, Union

import pandas as pd

from core.errors import (
    EmptyInputError,
    MalformedLineError,
    MissingHeaderError,
    MixedTimestampFormatsError,
)
from utils.file_io import decode_source, read_text_file, write_text_atomic, PathLike
from utils.formatter import format_number
from utils.logger import get_logger

logger = get_logger(__name__)

HEADER = ("sender_id", "recipient_id", "timestamp")

_EPOCH_RE = re.compile(r"^[+-]?\d+(\.\d+)?$")
_RFC3339_RE = re.compile(
    r"^\d{4}-\d{2}-\d{2}[Tt ]\d{2}:\d{2}:\d{2}(\.\d+)?([Zz]|[+-]\d{2}:\d{2})$"
)

TIMESTAMP_FORMATS = ("auto", "epoch", "rfc3339")


@dataclass(frozen=True)
class EventRecord:
    sender: Optional[str]
    recipient: str
    timestamp: float

    @property
    def is_seed(self) -> bool:
        return self.sender is None


@dataclass(frozen=True)
class MalformedLine:
    line_no: int
    reason: str
    raw: str = ""


@dataclass(frozen=True)
class FormatConfig:
    delimiter: str = ","
    comment: str = "#"
    timestamp_format: str = "auto"
    strict: bool = False

    def __post_init__(self):
        if self.timestamp_format not in TIMESTAMP_FORMATS:
            raise ValueError(
                f"timestamp_format must be one of {TIMESTAMP_FORMATS}, got {self.timestamp_format!r}"
            )


@dataclass(frozen=True)
class EventLog:
    """Transmission records sorted by timestamp; ties keep file order."""
    records: Tuple[EventRecord, ...]
    diagnostics: Tuple[MalformedLine, ...] = field(default=(), compare=False)
    comments: Tuple[str, ...] = field(default=(), compare=False)

    @classmethod
    def from_records(cls, records: Iterable[EventRecord],
                     diagnostics: Sequence[MalformedLine] = (),
                     comments: Sequence[str] = ()) -> "EventLog":
        # sorted() is stable, which is the documented equal-timestamp tie-break
        ordered = tuple(sorted(records, key=lambda r: r.timestamp))
        return cls(records=ordered, diagnostics=tuple(diagnostics), comments=tuple(comments))

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[EventRecord]:
        return iter(self.records)

    @property
    def seeds(self) -> Tuple[EventRecord, ...]:
        return tuple(r for r in self.records if r.is_seed)


def _classify_timestamp(value: str) -> Optional[str]:
    if _EPOCH_RE.match(value):
        return "epoch"
    if _RFC3339_RE.match(value):
        return "rfc3339"
    return None


def _to_seconds(value: str, kind: str) -> float:
    if kind == "epoch":
        return float(value)
    stamp = pd.Timestamp(value)
    if stamp.tzinfo is None:
        stamp = stamp.tz_localize("UTC")
    return stamp.timestamp()


def parse_events(source: Union[bytes, str], fmt: FormatConfig = FormatConfig()) -> EventLog:
    """
    Parse an event CSV into an EventLog.

    Args:
        source: Raw bytes (UTF-8) or already decoded text
        fmt: Dialect options

    Returns:
        EventLog sorted by timestamp, with malformed lines collected as diagnostics

    Raises:
        EmptyInputError: If there is no header or no valid record
        MissingHeaderError: If the first non-comment line is not the header
        MixedTimestampFormatsError: If epoch and RFC 3339 values are mixed
        MalformedLineError: On the first bad line when fmt.strict is set
    """
    text = decode_source(source)

    comments = []
    diagnostics = []
    pending = []  # (line_no, raw, sender, recipient, raw_timestamp, kind)
    header_seen = False

    def reject(line_no: int, reason: str, raw: str):
        if fmt.strict:
            raise MalformedLineError(line_no, reason, raw)
        logger.warning(f"Skipping line {line_no}: {reason}")
        diagnostics.append(MalformedLine(line_no, reason, raw))

    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        if not header_seen and stripped.startswith(fmt.comment):
            comments.append(stripped[len(fmt.comment):].strip())
            continue

        fields = next(csv.reader([raw], delimiter=fmt.delimiter))
        fields = [f.strip() for f in fields]

        if not header_seen:
            if tuple(fields) != HEADER:
                raise MissingHeaderError(
                    f"line {line_no}: expected header {','.join(HEADER)}, got {stripped!r}"
                )
            header_seen = True
            continue

        if len(fields) != len(HEADER):
            reject(line_no, f"expected {len(HEADER)} fields, got {len(fields)}", raw)
            continue
        sender, recipient, stamp = fields
        if not recipient:
            reject(line_no, "empty recipient_id", raw)
            continue
        kind = _classify_timestamp(stamp)
        if kind is None or (fmt.timestamp_format != "auto" and kind != fmt.timestamp_format):
            reject(line_no, f"unparsable timestamp {stamp!r}", raw)
            continue
        pending.append((line_no, raw, sender or None, recipient, stamp, kind))

    if not header_seen:
        raise EmptyInputError("input has no header and no records")

    kinds = {row[5] for row in pending}
    if len(kinds) > 1:
        first_epoch = next(row[0] for row in pending if row[5] == "epoch")
        first_rfc = next(row[0] for row in pending if row[5] == "rfc3339")
        raise MixedTimestampFormatsError(
            f"epoch (line {first_epoch}) and RFC 3339 (line {first_rfc}) timestamps are mixed"
        )

    records = []
    for line_no, raw, sender, recipient, stamp, kind in pending:
        try:
            seconds = _to_seconds(stamp, kind)
        except ValueError as e:
            reject(line_no, f"unparsable timestamp {stamp!r}: {e}", raw)
            continue
        records.append(EventRecord(sender, recipient, seconds))

    if not records:
        raise EmptyInputError("input has no valid records")

    log = EventLog.from_records(records, diagnostics, comments)
    logger.debug(f"Parsed {len(log)} records, {len(diagnostics)} malformed lines")
    return log


def read_events(file_path: PathLike, fmt: FormatConfig = FormatConfig()) -> EventLog:
    """Read and parse an event CSV file."""
    return parse_events(read_text_file(file_path), fmt)


def format_events(log: EventLog, comments: Sequence[str] = ()) -> str:
    """Serialize an EventLog to the CSV dialect read by parse_events."""
    buffer = io.StringIO()
    for comment in comments:
        buffer.write(f"# {comment}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    quoted = csv.writer(buffer, lineterminator="\n", quoting=csv.QUOTE_ALL)
    writer.writerow(HEADER)
    for record in log.records:
        row = [record.sender or "", record.recipient, format_number(record.timestamp)]
        # a leading `#` is quoted so comment-skipping readers still see the record
        (quoted if row[0].startswith("#") else writer).writerow(row)
    return buffer.getvalue()


def write_events(log: EventLog, file_path: PathLike, comments: Sequence[str] = ()):
    return write_text_atomic(file_path, format_events(log, comments))
