"""Aggregates run records into the per-setting result table.

A cell counts the runs whose answer was correct, out of all runs for
that (setting, question).  With ``count_retries`` off, only the first
answer counts and post-retry changes are ignored; with it on, the
final verdict counts.  The majority view marks a question correct when
strictly more than half of its runs are.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import IncompleteGrid
from .experiment import RunRecord


def _setting_sort_key(label: str) -> tuple[str, int]:
    match = re.match(r"^(.*) \((S|L)\)$", label)
    if match:
        return match.group(1), 0 if match.group(2) == "S" else 1
    return label, 2


def _question_sort_key(code: str) -> tuple[int, str]:
    match = re.match(r"^q(\d+)", code)
    return (int(match.group(1)) if match else 10**9, code)


@dataclass(frozen=True, eq=True)
class SummaryTable:
    """Settings as rows, questions as columns, correct counts as cells.

    ``missing`` lists grid combinations without a record; it and the
    ``incomplete`` flag are diagnostics and do not take part in
    equality, so a table survives the csv round trip unchanged.
    """

    settings: tuple[str, ...]
    questions: tuple[str, ...]
    counts: Mapping[tuple[str, str], int]
    totals: Mapping[tuple[str, str], int]
    missing: tuple[tuple[str, int, int, str], ...] = field(default=(), compare=False)
    incomplete: bool = field(default=False, compare=False)

    def cell(self, setting: str, question: str) -> tuple[int, int]:
        key = (setting, question)
        return self.counts.get(key, 0), self.totals.get(key, 0)

    def row(self, setting: str) -> tuple[int, ...]:
        return tuple(self.counts.get((setting, q), 0) for q in self.questions)


def aggregate(records: Iterable[RunRecord], count_retries: bool = False) -> SummaryTable:
    """Build the summary table; gaps are flagged, never fatal."""
    records = list(records)
    counts: dict[tuple[str, str], int] = {}
    totals: dict[tuple[str, str], int] = {}
    seen: set[tuple[str, int, int, str]] = set()
    settings: set[str] = set()
    questions: set[str] = set()
    sessions: set[int] = set()
    runs: set[int] = set()

    for record in records:
        settings.add(record.setting)
        questions.add(record.question)
        sessions.add(record.session_id)
        runs.add(record.run_index)
        seen.add((record.setting, record.session_id, record.run_index, record.question))
        key = (record.setting, record.question)
        totals[key] = totals.get(key, 0) + 1
        correct = (
            record.final_verdict_correct() if count_retries else record.first_verdict_correct()
        )
        if correct:
            counts[key] = counts.get(key, 0) + 1

    for s in settings:
        for q in questions:
            counts.setdefault((s, q), 0)
            totals.setdefault((s, q), 0)

    missing = tuple(
        (s, sid, rid, q)
        for s in sorted(settings, key=_setting_sort_key)
        for sid in sorted(sessions)
        for rid in sorted(runs)
        for q in sorted(questions, key=_question_sort_key)
        if (s, sid, rid, q) not in seen
    )
    return SummaryTable(
        settings=tuple(sorted(settings, key=_setting_sort_key)),
        questions=tuple(sorted(questions, key=_question_sort_key)),
        counts=counts,
        totals=totals,
        missing=missing,
        incomplete=bool(missing) or not records,
    )


def check_complete(table: SummaryTable) -> None:
    if table.incomplete:
        gaps = ", ".join(
            f"{s}/session{sid}/run{rid}/{q}" for s, sid, rid, q in table.missing[:5]
        )
        suffix = "..." if len(table.missing) > 5 else ""
        raise IncompleteGrid(f"run records do not cover the full grid: {gaps}{suffix}" if gaps
                             else "no run records")


def majority_verdict(
    records: Iterable[RunRecord], setting: str, count_retries: bool = False
) -> dict[str, bool]:
    """Per-question majority: correct iff strictly more than half the
    runs for that question are correct."""
    per_question: dict[str, list[RunRecord]] = {}
    for record in records:
        if record.setting == setting:
            per_question.setdefault(record.question, []).append(record)
    verdicts: dict[str, bool] = {}
    for question in sorted(per_question, key=_question_sort_key):
        group = per_question[question]
        correct = sum(
            1
            for r in group
            if (r.final_verdict_correct() if count_retries else r.first_verdict_correct())
        )
        verdicts[question] = correct * 2 > len(group)
    return verdicts


def _question_display(questions: tuple[str, ...]) -> dict[str, str]:
    short = {q: q.split(":", 1)[0].upper() for q in questions}
    labels = list(short.values())
    return {
        q: (label if labels.count(label) == 1 else q) for q, label in short.items()
    }


def render_report(table: SummaryTable, format: str = "text") -> str:
    """Deterministic rendering: text mirrors the result-table layout,
    csv and machine forms parse back to the identical table."""
    if format == "text":
        return _render_text(table)
    if format == "csv":
        return _render_csv(table)
    if format == "machine":
        return _render_machine(table)
    raise ValueError(f"unknown report format {format!r}")


def _render_text(table: SummaryTable) -> str:
    display = _question_display(table.questions)
    header = [""] + [display[q] for q in table.questions]
    all_totals = {table.totals.get((s, q), 0) for s in table.settings for q in table.questions}
    uniform = len(all_totals) == 1 and all_totals != {0}
    rows = [header]
    for setting in table.settings:
        cells = []
        for question in table.questions:
            count, total = table.cell(setting, question)
            cells.append(str(count) if uniform else f"{count}/{total}")
        rows.append([setting] + cells)
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = []
    for row in rows:
        lines.append(
            "  ".join(
                cell.ljust(widths[i]) if i == 0 else cell.rjust(widths[i])
                for i, cell in enumerate(row)
            ).rstrip()
        )
    if uniform:
        lines.append(f"correct answers out of {next(iter(all_totals))} runs")
    return "\n".join(lines) + "\n"


def _render_csv(table: SummaryTable) -> str:
    out = io.StringIO(newline="")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["setting"] + list(table.questions))
    for setting in table.settings:
        row = [setting]
        for question in table.questions:
            count, total = table.cell(setting, question)
            row.append(f"{count}/{total}")
        writer.writerow(row)
    return out.getvalue()


def parse_summary_csv(text: str) -> SummaryTable:
    rows = list(csv.reader(io.StringIO(text, newline="")))
    if not rows or not rows[0] or rows[0][0] != "setting":
        raise ValueError("summary csv must start with a 'setting' header row")
    questions = tuple(rows[0][1:])
    settings = []
    counts: dict[tuple[str, str], int] = {}
    totals: dict[tuple[str, str], int] = {}
    for row in rows[1:]:
        if not row:
            continue
        setting = row[0]
        settings.append(setting)
        for question, cell in zip(questions, row[1:]):
            correct, _, total = cell.partition("/")
            counts[(setting, question)] = int(correct)
            totals[(setting, question)] = int(total)
    return SummaryTable(tuple(settings), questions, counts, totals)


def _render_machine(table: SummaryTable) -> str:
    payload = {
        "settings": list(table.settings),
        "questions": list(table.questions),
        "cells": {
            setting: {
                question: list(table.cell(setting, question)) for question in table.questions
            }
            for setting in table.settings
        },
        "missing": [list(item) for item in table.missing],
        "incomplete": table.incomplete,
    }
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def parse_summary_machine(text: str) -> SummaryTable:
    payload = json.loads(text)
    settings = tuple(payload["settings"])
    questions = tuple(payload["questions"])
    counts: dict[tuple[str, str], int] = {}
    totals: dict[tuple[str, str], int] = {}
    for setting in settings:
        for question in questions:
            correct, total = payload["cells"][setting][question]
            counts[(setting, question)] = int(correct)
            totals[(setting, question)] = int(total)
    return SummaryTable(
        settings,
        questions,
        counts,
        totals,
        missing=tuple((s, int(sid), int(rid), q) for s, sid, rid, q in payload["missing"]),
        incomplete=bool(payload["incomplete"]),
    )
