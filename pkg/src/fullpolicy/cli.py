"""Command-line interface.

Subcommands: parse, render, validate, query, grade, run, report.
Exit codes: 0 success, 1 data error, 2 usage error.

Text-format policies are single files; tabular policies are a pair of
sheets addressed by a base path: ``--policy orderoo --format tabular``
reads ``orderoo.processing.csv`` and ``orderoo.sharing.csv``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .errors import PolicyError
from .experiment import (
    LiveTransport,
    OfflineTransport,
    load_config,
    read_records,
    run_experiment,
)
from .grading import build_vocabulary, grade as grade_answer
from .model import PolicyDocument
from .oracle import AnswerKind, answer, parse_question
from .report import aggregate, majority_verdict, render_report
from .tabular import parse_tabular, render_tabular
from .textformat import parse_text, render_text
from .validator import (
    DEFAULT_VAGUE_PHRASES,
    Severity,
    lint_vagueness,
    load_lexicon,
    validate,
)


def _tabular_paths(base: str) -> tuple[Path, Path]:
    if base.endswith(".processing.csv"):
        stem = base[: -len(".processing.csv")]
    elif base.endswith(".sharing.csv"):
        stem = base[: -len(".sharing.csv")]
    else:
        stem = base
    return Path(f"{stem}.processing.csv"), Path(f"{stem}.sharing.csv")


def _load_policy(args: argparse.Namespace) -> PolicyDocument:
    if args.format == "tabular":
        processing, sharing = _tabular_paths(args.policy)
        company = getattr(args, "company", None)
        if company:
            return parse_tabular(
                processing.read_text(encoding="utf-8"),
                sharing.read_text(encoding="utf-8"),
                company=company,
            )
        return parse_tabular(
            processing.read_text(encoding="utf-8"), sharing.read_text(encoding="utf-8")
        )
    return parse_text(Path(args.policy).read_text(encoding="utf-8"))


def _emit_policy(policy: PolicyDocument, target: str, out: str | None) -> None:
    if target == "tabular":
        if out is None:
            raise PolicyError("tabular output needs --out <base path>")
        processing, sharing = _tabular_paths(out)
        sheets = render_tabular(policy)
        processing.write_text(sheets[0], encoding="utf-8")
        sharing.write_text(sheets[1], encoding="utf-8")
        print(f"wrote {processing} and {sharing}")
        return
    text = render_text(policy)
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")
        print(f"wrote {out}")


def _add_policy_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--policy", required=True, help="policy file (or tabular base path)")
    parser.add_argument(
        "--format", choices=("text", "tabular"), default="text", help="input policy format"
    )
    parser.add_argument("--company", help="company label for tabular input")


def _cmd_parse(args: argparse.Namespace) -> int:
    policy = _load_policy(args)
    _emit_policy(policy, args.to or args.format, args.out)
    return 0


def _cmd_render(args: argparse.Namespace) -> int:
    policy = _load_policy(args)
    _emit_policy(policy, args.to, args.out)
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    policy = _load_policy(args)
    lexicon = (
        load_lexicon(Path(args.lexicon).read_text(encoding="utf-8"))
        if args.lexicon
        else list(DEFAULT_VAGUE_PHRASES)
    )
    findings = validate(policy) + lint_vagueness(policy, lexicon)
    for finding in findings:
        print(finding.format())
    errors = sum(1 for f in findings if f.severity is Severity.ERROR)
    warnings = len(findings) - errors
    print(f"{errors} error(s), {warnings} warning(s)")
    return 1 if errors else 0


def _vocab_for(args: argparse.Namespace, policy: PolicyDocument):
    alias_text = (
        Path(args.alias_file).read_text(encoding="utf-8") if args.alias_file else None
    )
    return build_vocabulary(policy, alias_text)


def _cmd_query(args: argparse.Namespace) -> int:
    policy = _load_policy(args)
    vocab = _vocab_for(args, policy)
    key = answer(policy, parse_question(args.question), vocab.alias_table)
    if key.kind is AnswerKind.BOOLEAN:
        print("yes" if key.value else "no")
        for index in key.evidence:
            entry = policy.sharing[index]
            print(f"evidence: sharing[{index}] {entry.recipient} <- {entry.data_type}")
    else:
        for entity in key.display:
            print(entity)
    return 0


def _cmd_grade(args: argparse.Namespace) -> int:
    policy = _load_policy(args)
    vocab = _vocab_for(args, policy)
    key = answer(policy, parse_question(args.question), vocab.alias_table)
    if args.answer_file == "-":
        answer_text = sys.stdin.read()
    else:
        answer_text = Path(args.answer_file).read_text(encoding="utf-8")
    result = grade_answer(answer_text, key, vocab)
    print(f"verdict: {result.verdict.value}")
    for name in ("matched", "missing", "extra_in_document", "extra_not_in_document"):
        print(f"{name}: {', '.join(sorted(getattr(result, name)))}")
    print(f"negation_detected: {str(result.negation_detected).lower()}")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_config(Path(args.config).read_text(encoding="utf-8"))
    policy_path = args.policy or config.policy_file
    if policy_path is None:
        raise PolicyError("no policy file: give --policy or set policy_file in the config")
    policy_text = Path(policy_path).read_text(encoding="utf-8")
    alias_text = None
    source = args.alias_file or config.alias_file
    if source:
        alias_text = Path(source).read_text(encoding="utf-8")
    if args.offline:
        transport = OfflineTransport(args.offline)
    else:
        if not config.endpoint:
            raise PolicyError("live runs need an endpoint in the config (or use --offline)")
        transport = LiveTransport(config.endpoint, config.model_id, config.api_key_env)
    records = run_experiment(
        config, policy_text, transport, out_dir=args.out_dir, alias_text=alias_text
    )
    for record in records:
        verdict = record.grade.verdict.value if record.grade else f"incomplete ({record.error})"
        print(
            f"{record.setting} session{record.session_id} run{record.run_index} "
            f"{record.question}: {verdict}"
        )
    print(f"{len(records)} run record(s) written to {args.out_dir}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    records = read_records(args.records)
    table = aggregate(records, count_retries=args.count_retries)
    if table.incomplete:
        print(
            f"warning: incomplete run grid ({len(table.missing)} gap(s))", file=sys.stderr
        )
    sys.stdout.write(render_report(table, args.report_format))
    if args.majority:
        for setting in table.settings:
            verdicts = majority_verdict(records, setting, count_retries=args.count_retries)
            marks = ", ".join(f"{q}:{'yes' if v else 'no'}" for q, v in verdicts.items())
            print(f"majority {setting}: {marks}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fullpolicy",
        description="Tooling for fully comprehensive privacy policies.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a policy and re-emit it (canonical form)")
    _add_policy_args(p)
    p.add_argument("--to", choices=("text", "tabular"), help="output format (default: input format)")
    p.add_argument("--out", help="output file (text) or base path (tabular)")
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("render", help="convert a policy between the two formats")
    _add_policy_args(p)
    p.add_argument("--to", choices=("text", "tabular"), required=True)
    p.add_argument("--out", help="output file (text) or base path (tabular)")
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("validate", help="completeness checks and vague-phrase lint")
    _add_policy_args(p)
    p.add_argument("--lexicon", help="vague-phrase lexicon file (default: built-in)")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("query", help="answer a question spec, e.g. q2:email address")
    p.add_argument("question")
    _add_policy_args(p)
    p.add_argument("--alias-file", help="alias table (alias => canonical)")
    p.set_defaults(func=_cmd_query)

    p = sub.add_parser("grade", help="grade a free-text answer against the oracle")
    p.add_argument("question")
    _add_policy_args(p)
    p.add_argument("--answer-file", required=True, help="answer text file, or - for stdin")
    p.add_argument("--alias-file", help="alias table (alias => canonical)")
    p.set_defaults(func=_cmd_grade)

    p = sub.add_parser("run", help="run the chat experiment grid")
    p.add_argument("--config", required=True, help="experiment config (JSON)")
    p.add_argument("--policy", help="policy text file (overrides config)")
    p.add_argument("--alias-file", help="alias table (overrides config)")
    p.add_argument("--out-dir", required=True, help="directory for run-record files")
    p.add_argument("--offline", help="replay transcripts from this directory instead of the live service")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("report", help="aggregate run records into the summary table")
    p.add_argument("records", nargs="+", help="run-record files or directories")
    p.add_argument("--count-retries", action="store_true", help="count post-redo verdicts")
    p.add_argument(
        "--format",
        dest="report_format",
        choices=("text", "csv", "machine"),
        default="text",
    )
    p.add_argument("--majority", action="store_true", help="also print per-setting majority verdicts")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PolicyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
