"""Reports: exponent rows with exact fractions, rendered as text, CSV or JSON."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

from . import __version__
from .exact import format_fraction, parse_fraction, render_ceiling
from .exponents import ExponentRecord, ExponentTable

TABLE_COLUMNS = ("s", "delta_exact", "delta_display", "kind", "provenance")


def s_label(s: Fraction) -> str:
    """Terminating decimals print as decimals, anything else as num/den."""
    d = s.denominator
    while d % 2 == 0:
        d //= 2
    while d % 5 == 0:
        d //= 5
    if d != 1:
        return format_fraction(s)
    places = 0
    while (s * 10**places).denominator != 1:
        places += 1
    return render_ceiling(s, places)


def provenance_chain(rec: ExponentRecord, table: ExponentTable | None = None) -> str:
    """Label of ``rec`` followed by its ancestors down to baseline records."""
    parts = [rec.label or rec.kind]
    if rec.parents:
        parts[0] += " <- " + ", ".join(s_label(p) for p in rec.parents)
    flags = [f for f, on in (("strict", rec.strict), ("conditional", rec.conditional),
                             ("feedback", rec.feedback)) if on]
    if flags:
        parts[0] += " [" + ", ".join(flags) + "]"
    if table is not None:
        seen = {rec.s}
        todo = list(rec.parents)
        while todo:
            p = todo.pop(0)
            parent = table.get(p)
            if parent is None or p in seen:
                continue
            seen.add(p)
            if parent.kind == "baseline":
                continue
            parts.append(f"{s_label(p)}: {parent.label}")
            todo.extend(parent.parents)
    return "; ".join(parts)


@dataclass
class Report:
    metadata: dict
    rows: list = field(default_factory=list)
    columns: tuple = TABLE_COLUMNS

    def add_record(self, rec: ExponentRecord, places: int, table=None, s=None):
        s = rec.s if s is None else s
        self.rows.append({
            "s": s_label(s),
            "delta_exact": format_fraction(rec.delta),
            "delta_display": render_ceiling(rec.delta, places),
            "kind": rec.kind,
            "provenance": provenance_chain(rec, table),
        })

    def to_json(self) -> str:
        meta = {"tool": "admex", "version": __version__, **self.metadata}
        return json.dumps({"metadata": meta, "rows": self.rows}, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(self.columns), lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({c: row.get(c, "") for c in self.columns})
        return buf.getvalue()

    def to_text(self) -> str:
        cols = list(self.columns)
        cells = [cols] + [[str(r.get(c, "")) for c in cols] for r in self.rows]
        widths = [max(len(row[i]) for row in cells) for i in range(len(cols))]
        lines = ["  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in cells]
        meta = ", ".join(f"{k}={v}" for k, v in self.metadata.items())
        return f"# {meta}\n" + "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        return {"json": self.to_json, "csv": self.to_csv, "text": self.to_text}[fmt]()


def read_json(text: str) -> tuple[dict, list]:
    data = json.loads(text)
    return data["metadata"], data["rows"]


def read_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


def exact_deltas(rows) -> list[Fraction]:
    return [parse_fraction(r["delta_exact"]) for r in rows]
