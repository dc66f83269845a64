"""Ingestion of p-value tables from CSV/TSV text and JSON bodies."""

from __future__ import annotations

import csv
import io
import math

import numpy as np

from .study import PValueStudy

__all__ = ["ParseError", "parse_table", "study_from_text", "study_from_json"]


class ParseError(ValueError):
    """Unparseable input; carries the offending 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


def _parse_p(cell: str, line: int) -> float:
    text = cell.strip()
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"not a p-value: {text!r}", line) from None
    if math.isnan(value) or not 0.0 <= value <= 1.0:
        raise ParseError(f"p-value out of [0, 1]: {text!r}", line)
    return value


def parse_table(text: str) -> tuple[list[str], np.ndarray]:
    """Parse `id<sep>p` rows (comma or tab separated, optional header).

    The delimiter is sniffed from the first non-blank line; a header is
    assumed when the second field of the first row does not parse as a number.
    """
    lines = text.splitlines()
    numbered = [(i + 1, ln) for i, ln in enumerate(lines) if ln.strip()]
    if not numbered:
        raise ParseError("no data rows")
    delimiter = "\t" if "\t" in numbered[0][1] else ","

    ids: list[str] = []
    ps: list[float] = []
    seen: set[str] = set()
    for pos, (line_no, raw) in enumerate(numbered):
        row = next(csv.reader(io.StringIO(raw), delimiter=delimiter))
        row = [cell.strip() for cell in row]
        if len(row) != 2:
            raise ParseError(f"expected 2 fields (id, p), got {len(row)}", line_no)
        if pos == 0:
            try:
                float(row[1])
            except ValueError:
                continue  # header row
        ident = row[0]
        if not ident:
            raise ParseError("empty hypothesis id", line_no)
        if ident in seen:
            raise ParseError(f"duplicate hypothesis id: {ident!r}", line_no)
        seen.add(ident)
        ids.append(ident)
        ps.append(_parse_p(row[1], line_no))
    if not ids:
        raise ParseError("no data rows")
    return ids, np.asarray(ps, dtype=np.float64)


def study_from_text(text: str) -> PValueStudy:
    ids, ps = parse_table(text)
    return PValueStudy(ps, ids=ids)


def study_from_json(payload) -> PValueStudy:
    """Build a study from {"p": [...], "ids": [...]} or a bare list of p-values."""
    if isinstance(payload, list):
        payload = {"p": payload}
    if not isinstance(payload, dict) or "p" not in payload:
        raise ParseError('expected {"p": [...]} or a JSON array of p-values')
    p = payload["p"]
    if not isinstance(p, list) or not p:
        raise ParseError('"p" must be a non-empty array')
    for i, value in enumerate(p):
        if not isinstance(value, (int, float)) or isinstance(value, bool) \
                or math.isnan(float(value)) or not 0.0 <= float(value) <= 1.0:
            raise ParseError(f"p-value out of [0, 1] at position {i}")
    ids = payload.get("ids")
    if ids is not None:
        if not isinstance(ids, list) or len(ids) != len(p):
            raise ParseError('"ids" must be an array matching "p" in length')
        ids = [str(s) for s in ids]
        if len(set(ids)) != len(ids):
            raise ParseError("ids must be unique")
    try:
        return PValueStudy(np.asarray(p, dtype=np.float64), ids=ids)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
