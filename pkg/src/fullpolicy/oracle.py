"""Deterministic ground-truth answers for the six question templates.

Questions are structured (template + parameter), not natural language;
turning a user's free-text question into a template is out of scope.
``answer`` is the production implementation; ``brute_force_answer``
recomputes the same contract with a flat exhaustive scan and exists so
tests can cross-check the two.

Entity strings in answers are canonical: lowercased, whitespace
collapsed.  ``display`` keeps them in document order for rendering.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

from .errors import BadQuestionSpec, UnknownBasisKind, UnknownDataType
from .model import PolicyDocument, basis_kind_from_token, entries_iter


def canon(text: str) -> str:
    """Canonical entity form: trimmed, lowercased, whitespace collapsed."""
    return " ".join(text.split()).lower()


class QuestionTemplate(Enum):
    LIST_DATA_TYPES = "q1"
    PURPOSES_OF = "q2"
    RECIPIENTS_OF = "q3"
    DATA_BY_BASIS = "q4"
    DATA_SHARED_WITH = "q5"
    SHARES_WITH_BOOL = "q6"


_TEMPLATE_BY_CODE = {t.value: t for t in QuestionTemplate}


@dataclass(frozen=True)
class QuestionSpec:
    template: QuestionTemplate
    parameter: str | None = None

    def __post_init__(self) -> None:
        if self.template is QuestionTemplate.LIST_DATA_TYPES:
            if self.parameter is not None:
                raise BadQuestionSpec("q1 takes no parameter")
        elif not self.parameter or not self.parameter.strip():
            raise BadQuestionSpec(f"{self.template.value} requires a parameter")

    def encode(self) -> str:
        if self.parameter is None:
            return self.template.value
        return f"{self.template.value}:{self.parameter}"


def parse_question(text: str) -> QuestionSpec:
    """Decode the one-line form: ``q1``, ``q2:email address``, ..."""
    code, sep, parameter = text.strip().partition(":")
    template = _TEMPLATE_BY_CODE.get(code.strip().lower())
    if template is None:
        raise BadQuestionSpec(f"unknown question template {code!r}")
    return QuestionSpec(template, parameter.strip() if sep else None)


class AnswerKind(Enum):
    ENTITY_SET = "entity_set"
    BOOLEAN = "boolean"


@dataclass(frozen=True)
class AnswerKey:
    """Ground truth for one question instance.

    Equality is set equality for entity answers and value-plus-evidence
    equality for boolean ones; ``display`` (document order) and
    ``subject`` (the questioned recipient, used by the grader) do not
    participate.
    """

    kind: AnswerKind
    entities: frozenset[str] = frozenset()
    value: bool = False
    evidence: tuple[int, ...] = ()
    display: tuple[str, ...] = field(default=(), compare=False)
    subject: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.kind is AnswerKind.BOOLEAN and not self.value and self.evidence:
            raise ValueError("a negative boolean answer cannot carry evidence")


def _entity_key(items: list[str], subject: str | None = None) -> AnswerKey:
    display: list[str] = []
    for item in items:
        c = canon(item)
        if c and c not in display:
            display.append(c)
    return AnswerKey(
        AnswerKind.ENTITY_SET,
        entities=frozenset(display),
        display=tuple(display),
        subject=subject,
    )


def _resolve_recipient(name: str, aliases: Mapping[str, str] | None) -> str:
    c = canon(name)
    if aliases:
        return aliases.get(c, c)
    return c


def _recipient_matches(
    entry_recipient: str, wanted: str, aliases: Mapping[str, str] | None
) -> bool:
    return _resolve_recipient(entry_recipient, aliases) == _resolve_recipient(wanted, aliases)


def answer(
    policy: PolicyDocument,
    question: QuestionSpec,
    aliases: Mapping[str, str] | None = None,
) -> AnswerKey:
    """Compute the ground-truth answer key.

    An unresolvable data-type or basis parameter is an error, distinct
    from the legitimately empty/false answer produced by a recipient
    the document never mentions.  ``aliases`` maps canonical alias
    strings to canonical recipient names and is shared with the grader.
    """
    t = question.template
    if t is QuestionTemplate.LIST_DATA_TYPES:
        return _entity_key([cat.data_type for cat in policy.categories])

    parameter = question.parameter or ""
    if t is QuestionTemplate.PURPOSES_OF:
        cat = policy.category_for(parameter)
        if cat is None:
            raise UnknownDataType(f"data type {parameter!r} is not disclosed")
        return _entity_key([entry.purpose for entry in cat.entries], subject=canon(cat.data_type))

    if t is QuestionTemplate.RECIPIENTS_OF:
        cat = policy.category_for(parameter)
        if cat is None:
            raise UnknownDataType(f"data type {parameter!r} is not disclosed")
        return _entity_key(
            [s.recipient for s in policy.sharing_for(cat.data_type)],
            subject=canon(cat.data_type),
        )

    if t is QuestionTemplate.DATA_BY_BASIS:
        kind = basis_kind_from_token(parameter)
        if kind is None:
            raise UnknownBasisKind(f"{parameter!r} is not a legal-basis kind")
        pairs = []
        for cat, entry in entries_iter(policy):
            if entry.legal_basis.kind is kind:
                pairs.append(f"{cat.data_type}: {entry.purpose}")
        for entry in policy.sharing:
            if entry.legal_basis is not None and entry.legal_basis.kind is kind:
                pairs.append(f"{entry.data_type}: {entry.purpose_of_sharing}")
        return _entity_key(pairs, subject=kind.token)

    if t is QuestionTemplate.DATA_SHARED_WITH:
        found = []
        for entry in policy.sharing:
            if _recipient_matches(entry.recipient, parameter, aliases):
                found.append(entry.data_type)
        return _entity_key(found, subject=_resolve_recipient(parameter, aliases))

    assert t is QuestionTemplate.SHARES_WITH_BOOL
    evidence = tuple(
        index
        for index, entry in enumerate(policy.sharing)
        if _recipient_matches(entry.recipient, parameter, aliases)
    )
    return AnswerKey(
        AnswerKind.BOOLEAN,
        value=bool(evidence),
        evidence=evidence,
        subject=_resolve_recipient(parameter, aliases),
    )


def brute_force_answer(
    policy: PolicyDocument,
    question: QuestionSpec,
    aliases: Mapping[str, str] | None = None,
) -> AnswerKey:
    """Same contract as ``answer``, as one flat scan with no lookups
    shared with the production path; kept deliberately plain."""
    t = question.template
    parameter = question.parameter or ""
    wanted = canon(parameter)

    if t is QuestionTemplate.LIST_DATA_TYPES:
        names = []
        for cat in policy.categories:
            names.append(cat.data_type)
        return _entity_key(names)

    if t in (QuestionTemplate.PURPOSES_OF, QuestionTemplate.RECIPIENTS_OF):
        exists = False
        matched_type = ""
        for cat in policy.categories:
            if canon(cat.data_type) == wanted:
                exists = True
                matched_type = canon(cat.data_type)
        if not exists:
            raise UnknownDataType(f"data type {parameter!r} is not disclosed")
        collected = []
        if t is QuestionTemplate.PURPOSES_OF:
            for cat, entry in entries_iter(policy):
                if canon(cat.data_type) == matched_type:
                    collected.append(entry.purpose)
        else:
            for entry in policy.sharing:
                if canon(entry.data_type) == matched_type:
                    collected.append(entry.recipient)
        return _entity_key(collected, subject=matched_type)

    if t is QuestionTemplate.DATA_BY_BASIS:
        kind = basis_kind_from_token(parameter)
        if kind is None:
            raise UnknownBasisKind(f"{parameter!r} is not a legal-basis kind")
        pairs = []
        for cat in policy.categories:
            for entry in cat.entries:
                if entry.legal_basis.kind is kind:
                    pairs.append(f"{cat.data_type}: {entry.purpose}")
        for share in policy.sharing:
            if share.legal_basis is not None and share.legal_basis.kind is kind:
                pairs.append(f"{share.data_type}: {share.purpose_of_sharing}")
        return _entity_key(pairs, subject=kind.token)

    if t is QuestionTemplate.DATA_SHARED_WITH:
        collected = []
        for entry in policy.sharing:
            if _recipient_matches(entry.recipient, parameter, aliases):
                collected.append(entry.data_type)
        return _entity_key(collected, subject=_resolve_recipient(parameter, aliases))

    assert t is QuestionTemplate.SHARES_WITH_BOOL
    hits = []
    index = 0
    for entry in policy.sharing:
        if _recipient_matches(entry.recipient, parameter, aliases):
            hits.append(index)
        index += 1
    return AnswerKey(
        AnswerKind.BOOLEAN,
        value=len(hits) > 0,
        evidence=tuple(hits),
        subject=_resolve_recipient(parameter, aliases),
    )
