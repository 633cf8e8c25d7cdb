"""Tooling for fully comprehensive privacy policies.

A typed policy model, two lossless serialization formats (two-sheet
tabular and solid text), a completeness validator, a deterministic
question-answering oracle, a free-text answer grader, a chat
experiment harness, and result aggregation.
"""

from .model import (
    DataCategory,
    LegalBasis,
    LegalBasisKind,
    PolicyDocument,
    ProcessingEntry,
    Role,
    SharingEntry,
    StorageKind,
    StorageRule,
    build_policy,
    entries_iter,
)
from .oracle import AnswerKey, AnswerKind, QuestionSpec, QuestionTemplate, answer, brute_force_answer, parse_question
from .tabular import parse_tabular, render_tabular
from .textformat import parse_text, render_text
from .validator import Finding, Severity, lint_vagueness, validate
from .grading import EntityVocabulary, Grade, Verdict, build_vocabulary, extract_mentions, grade
from .experiment import ExperimentConfig, RunRecord, compose_prompt, run_experiment
from .report import SummaryTable, aggregate, majority_verdict, render_report

__version__ = "0.1.0"

__all__ = [
    "AnswerKey",
    "AnswerKind",
    "DataCategory",
    "EntityVocabulary",
    "ExperimentConfig",
    "Finding",
    "Grade",
    "LegalBasis",
    "LegalBasisKind",
    "PolicyDocument",
    "ProcessingEntry",
    "QuestionSpec",
    "QuestionTemplate",
    "Role",
    "RunRecord",
    "Severity",
    "SharingEntry",
    "StorageKind",
    "StorageRule",
    "SummaryTable",
    "Verdict",
    "aggregate",
    "answer",
    "brute_force_answer",
    "build_policy",
    "build_vocabulary",
    "compose_prompt",
    "entries_iter",
    "extract_mentions",
    "grade",
    "lint_vagueness",
    "majority_verdict",
    "parse_question",
    "parse_tabular",
    "parse_text",
    "render_report",
    "render_tabular",
    "render_text",
    "run_experiment",
    "validate",
]
