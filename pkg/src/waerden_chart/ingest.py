"""CSV loaders for one-factor data in long ("group,value") or wide layout."""

from __future__ import annotations

import csv
import io
import math
import re
from pathlib import Path

from .errors import DomainError, ParseError
from .scores import GroupedSample

# plain decimal or scientific notation; no thousands or locale separators
_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")


def parse_number(text: str, line: int | None = None) -> float:
    s = text.strip()
    if not _NUMBER.fullmatch(s):
        raise ParseError(f"not a plain decimal number: {text!r}", line)
    value = float(s)
    if not math.isfinite(value):
        raise ParseError(f"value overflows: {text!r}", line)
    return value


def _rows(text: str):
    reader = csv.reader(io.StringIO(text))
    for row in reader:
        yield reader.line_num, row


def _build(order: list[str], data: dict[str, list[float]]) -> GroupedSample:
    if len(order) < 2:
        raise DomainError(f"need at least two groups, found {len(order)}")
    empty = [lab for lab in order if not data[lab]]
    if empty:
        raise DomainError(f"groups without observations: {empty}")
    return GroupedSample(tuple(order), tuple(tuple(data[lab]) for lab in order))


def load_long_csv(text: str) -> GroupedSample:
    """Parse ``group,value`` rows; groups keep their order of first appearance."""
    rows = _rows(text)
    header = None
    for line, row in rows:
        if any(cell.strip() for cell in row):
            header = (line, [cell.strip().lower() for cell in row])
            break
    if header is None:
        raise ParseError("empty input", 1)
    if header[1] != ["group", "value"]:
        raise ParseError(f"expected header 'group,value', got {','.join(header[1])!r}", header[0])
    order: list[str] = []
    data: dict[str, list[float]] = {}
    count = 0
    for line, row in rows:
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != 2:
            raise ParseError(f"expected 2 fields, got {len(row)}", line)
        label = row[0].strip()
        if not label:
            raise ParseError("missing group label", line)
        value = parse_number(row[1], line)
        if label not in data:
            order.append(label)
            data[label] = []
        data[label].append(value)
        count += 1
    if count < 2:
        raise ParseError(f"need at least 2 data rows, got {count}")
    return _build(order, data)


def load_wide_csv(text: str) -> GroupedSample:
    """Parse one column per group; blank cells (and short rows) mark absent values."""
    rows = _rows(text)
    header = None
    for line, row in rows:
        if any(cell.strip() for cell in row):
            header = (line, [cell.strip() for cell in row])
            break
    if header is None:
        raise ParseError("empty input", 1)
    labels = header[1]
    if any(not lab for lab in labels):
        raise ParseError("blank column label in header", header[0])
    if len(set(labels)) != len(labels):
        raise ParseError(f"duplicate column labels: {labels}", header[0])
    data: dict[str, list[float]] = {lab: [] for lab in labels}
    for line, row in rows:
        if len(row) > len(labels):
            extra = row[len(labels):]
            if any(cell.strip() for cell in extra):
                raise ParseError(f"row has {len(row)} fields but header has {len(labels)}", line)
        for label, cell in zip(labels, row):
            if cell.strip():
                data[label].append(parse_number(cell, line))
    return _build(labels, data)


def load_path(path: str | Path, wide: bool = False) -> GroupedSample:
    text = Path(path).read_text(encoding="utf-8-sig")
    return load_wide_csv(text) if wide else load_long_csv(text)


def to_long_csv(sample: GroupedSample) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["group", "value"])
    for label, values in zip(sample.labels, sample.groups):
        for v in values:
            writer.writerow([label, repr(v)])
    return out.getvalue()
