"""Typed schema for a fully comprehensive privacy policy.

The disclosure unit is one act of processing: a (data type, purpose,
legal basis, storage) tuple.  A document is a company name, an ordered
list of data categories (each holding its processing entries), and an
ordered list of sharing entries.

Two construction paths exist:

* ``build_policy`` applies the cross-object rules (uniqueness,
  reference resolution, sharing-order normalization) and, in strict
  mode, the completeness rules.  Parsers build in draft mode so that
  the validator, not the parser, reports completeness defects.
* direct dataclass construction applies only per-field rules; it is
  the escape hatch used by defect-injection tests to materialize
  documents that ``build_policy`` would reject.

Field texts are constrained at construction time so that the two
serialization formats stay unambiguous: no newlines, no ``;`` (the
in-sentence list separator), no ``". "`` and no trailing ``"."`` (the
sentence terminator).  See docs/format.md for the full table.

All types are frozen; a constructed document is immutable and safe to
share among any number of concurrent readers.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Literal, Sequence

from .errors import (
    DuplicateCategoryId,
    DuplicateDataType,
    DuplicatePurpose,
    DuplicateSharingEntry,
    EmptyCategory,
    FieldTextError,
    IncompleteSharingEntry,
    MissingBasisExplanation,
    MissingStorageRule,
    UnresolvedSharingReference,
)


class LegalBasisKind(Enum):
    """The six grounds that can legitimize an act of processing."""

    CONSENT = "consent"
    CONTRACTUAL_NECESSITY = "contractual necessity"
    LEGAL_OBLIGATION = "legal obligation"
    VITAL_INTEREST = "vital interest"
    PUBLIC_TASK = "public task"
    LEGITIMATE_INTEREST = "legitimate interest"

    @property
    def token(self) -> str:
        return self.value

    @property
    def needs_explanation(self) -> bool:
        # A legitimate interest must be named to allow a proportionality
        # assessment; a legal obligation must name the statute.
        return self in (LegalBasisKind.LEGITIMATE_INTEREST, LegalBasisKind.LEGAL_OBLIGATION)


BASIS_BY_TOKEN = {kind.value: kind for kind in LegalBasisKind}


def basis_kind_from_token(token: str) -> LegalBasisKind | None:
    return BASIS_BY_TOKEN.get(token.strip().lower())


class Role(Enum):
    CONTROLLER = "controller"
    PROCESSOR = "processor"


ROLE_BY_TOKEN = {role.value: role for role in Role}


class StorageKind(Enum):
    DURATION = "duration"
    CRITERIA = "criteria"


# --- field text rules ------------------------------------------------------

def _reject(field_name: str, reason: str) -> None:
    raise FieldTextError(f"{field_name}: {reason}")


def check_inline_text(field_name: str, text: str, *, required: bool = True) -> None:
    """Reserved-character rules shared by every in-sentence text slot."""
    if text == "":
        if required:
            _reject(field_name, "must not be empty")
        return
    if text != text.strip():
        _reject(field_name, "must not carry leading or trailing whitespace")
    if "\n" in text or "\r" in text:
        _reject(field_name, "must not contain line breaks")
    if ";" in text:
        _reject(field_name, "must not contain ';' (reserved list separator)")
    if ". " in text or text.endswith("."):
        _reject(field_name, "must not contain a sentence-ending '.'")


def check_name_text(field_name: str, text: str, *, required: bool = True) -> None:
    """Rule set for short names (purposes, data types): also bans ',()'."""
    check_inline_text(field_name, text, required=required)
    if text and any(ch in text for ch in ",()"):
        _reject(field_name, "must not contain ',', '(' or ')'")


# A parenthetical that looks like a rendered legal basis would make the
# text format's list-item boundaries ambiguous.
BASIS_MARKER_RE = re.compile(
    r" \((?:consent|contractual necessity|legal obligation|vital interest"
    r"|public task|legitimate interest|unspecified)(?:\)|:)",
    re.IGNORECASE,
)


def check_explanation_text(field_name: str, text: str) -> None:
    check_inline_text(field_name, text, required=False)
    if text and BASIS_MARKER_RE.search(" " + text):
        _reject(field_name, "must not contain a legal-basis-shaped parenthetical")


# --- value types ------------------------------------------------------------

@dataclass(frozen=True)
class LegalBasis:
    """One of the six grounds, optionally with the named interest/statute.

    An empty explanation is normalized to None; presence requirements
    are enforced by strict construction and linted by the validator.
    """

    kind: LegalBasisKind
    explanation: str | None = None

    def __post_init__(self) -> None:
        if self.explanation is not None and self.explanation.strip() == "":
            object.__setattr__(self, "explanation", None)
        if self.explanation is not None:
            check_inline_text("legal basis explanation", self.explanation)
            if "(" in self.explanation or ")" in self.explanation:
                _reject("legal basis explanation", "must not contain parentheses")


@dataclass(frozen=True)
class StorageRule:
    """Storage period (duration) or the criteria determining it.

    ``scope_note`` is the free-text qualifier naming why the rule is
    scoped to particular purposes (e.g. the statutes requiring it).
    Equal rules are the same rule: entries referencing equal values
    render as one storage sentence.
    """

    kind: StorageKind
    text: str
    scope_note: str | None = None

    def __post_init__(self) -> None:
        check_inline_text("storage text", self.text)
        if self.scope_note is not None:
            check_inline_text("storage scope note", self.scope_note)
            if ", we store your" in self.scope_note:
                _reject("storage scope note", "must not contain ', we store your'")


@dataclass(frozen=True)
class ProcessingEntry:
    """One act of processing under a data category.

    ``storage`` may be None only in draft documents; the validator
    reports the gap and strict construction rejects it.
    """

    purpose: str
    purpose_explanation: str = ""
    legal_basis: LegalBasis = field(default_factory=lambda: LegalBasis(LegalBasisKind.CONSENT))
    storage: StorageRule | None = None

    def __post_init__(self) -> None:
        check_name_text("purpose", self.purpose)
        if self.purpose.lower().startswith("required by "):
            _reject("purpose", "must not start with 'required by'")
        check_explanation_text("purpose explanation", self.purpose_explanation)


@dataclass(frozen=True)
class DataCategory:
    """One disclosed data type with its source and processing entries."""

    category_id: str
    data_type: str
    source: str = ""
    entries: tuple[ProcessingEntry, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        if not self.category_id or any(ch in self.category_id for ch in ".; \t"):
            _reject("category identifier", "must be non-empty without '.', ';' or whitespace")
        check_name_text("data type", self.data_type)
        check_inline_text("source", self.source, required=False)
        seen: set[str] = set()
        for entry in self.entries:
            key = entry.purpose.lower()
            if key in seen:
                raise DuplicatePurpose(
                    f"category {self.category_id!r}: duplicate purpose {entry.purpose!r}"
                )
            seen.add(key)


@dataclass(frozen=True)
class SharingEntry:
    """Disclosure of one data type to one recipient for one purpose.

    Role, purpose and basis may be missing only in draft documents;
    the validator reports them (rule E4).
    """

    recipient: str
    role: Role | None
    data_type: str
    purpose_of_sharing: str = ""
    purpose_explanation: str = ""
    legal_basis: LegalBasis | None = None

    def __post_init__(self) -> None:
        check_inline_text("recipient", self.recipient)
        if "(" in self.recipient or ")" in self.recipient:
            _reject("recipient", "must not contain parentheses")
        check_name_text("data type", self.data_type)
        check_name_text("purpose of sharing", self.purpose_of_sharing, required=False)
        if self.purpose_of_sharing.lower().startswith("required by "):
            _reject("purpose of sharing", "must not start with 'required by'")
        check_explanation_text("purpose explanation", self.purpose_explanation)

    def is_complete(self) -> bool:
        return (
            self.role is not None
            and self.purpose_of_sharing != ""
            and self.legal_basis is not None
        )


@dataclass(frozen=True)
class PolicyDocument:
    """The complete structured disclosure. Order is significant
    everywhere and preserved by every parse/render cycle."""

    company: str
    categories: tuple[DataCategory, ...] = ()
    sharing: tuple[SharingEntry, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "categories", tuple(self.categories))
        object.__setattr__(self, "sharing", tuple(self.sharing))
        if not self.company or self.company != self.company.strip():
            _reject("company", "must be non-empty without surrounding whitespace")
        if "\n" in self.company or "\r" in self.company:
            _reject("company", "must not contain line breaks")
        ids: set[str] = set()
        types: set[str] = set()
        for cat in self.categories:
            if cat.category_id in ids:
                raise DuplicateCategoryId(f"duplicate category identifier {cat.category_id!r}")
            ids.add(cat.category_id)
            key = cat.data_type.lower()
            if key in types:
                raise DuplicateDataType(f"duplicate data type {cat.data_type!r}")
            types.add(key)

    def category_for(self, data_type: str) -> DataCategory | None:
        """Case-insensitive lookup of the category disclosing a data type."""
        wanted = data_type.strip().lower()
        for cat in self.categories:
            if cat.data_type.lower() == wanted:
                return cat
        return None

    def sharing_for(self, data_type: str) -> tuple[SharingEntry, ...]:
        return tuple(s for s in self.sharing if s.data_type.lower() == data_type.strip().lower())


Mode = Literal["strict", "draft"]


def build_policy(
    company: str,
    categories: Sequence[DataCategory],
    sharing: Sequence[SharingEntry],
    mode: Mode = "strict",
) -> PolicyDocument:
    """Construct a document, enforcing the cross-object rules.

    Both modes resolve sharing references (rewriting each entry's data
    type to the referenced category's exact spelling) and reject
    duplicates.  Sharing entries are stably reordered to group by
    category position, which is the document order both formats emit.
    Strict mode additionally rejects every completeness defect the
    validator would report.
    """
    doc = PolicyDocument(company=company, categories=tuple(categories), sharing=())

    resolved: list[tuple[int, SharingEntry]] = []
    triples: set[tuple[str, str, str]] = set()
    for entry in sharing:
        cat = doc.category_for(entry.data_type)
        if cat is None:
            raise UnresolvedSharingReference(
                f"sharing entry for {entry.recipient!r} references unknown data type "
                f"{entry.data_type!r}"
            )
        if entry.data_type != cat.data_type:
            entry = dataclasses.replace(entry, data_type=cat.data_type)
        triple = (entry.recipient.lower(), entry.data_type.lower(), entry.purpose_of_sharing.lower())
        if triple in triples:
            raise DuplicateSharingEntry(
                f"duplicate sharing entry {entry.recipient!r} / {entry.data_type!r} / "
                f"{entry.purpose_of_sharing!r}"
            )
        triples.add(triple)
        resolved.append((doc.categories.index(cat), entry))

    resolved.sort(key=lambda pair: pair[0])  # stable: keeps within-category order
    doc = dataclasses.replace(doc, sharing=tuple(entry for _, entry in resolved))

    if mode == "strict":
        _check_strict(doc)
    return doc


def _check_strict(doc: PolicyDocument) -> None:
    for cat in doc.categories:
        if not cat.entries:
            raise EmptyCategory(f"category {cat.category_id!r} discloses no purpose")
        for entry in cat.entries:
            if entry.storage is None:
                raise MissingStorageRule(
                    f"category {cat.category_id!r}, purpose {entry.purpose!r}: no storage rule"
                )
            _check_basis(entry.legal_basis, f"category {cat.category_id!r}, purpose {entry.purpose!r}")
    for index, entry in enumerate(doc.sharing):
        if not entry.is_complete():
            raise IncompleteSharingEntry(
                f"sharing entry {index} ({entry.recipient!r}) lacks role, purpose or basis"
            )
        assert entry.legal_basis is not None
        _check_basis(entry.legal_basis, f"sharing entry {index} ({entry.recipient!r})")


def _check_basis(basis: LegalBasis, where: str) -> None:
    if basis.kind.needs_explanation and basis.explanation is None:
        raise MissingBasisExplanation(
            f"{where}: {basis.kind.token} requires a named explanation"
        )


def entries_iter(policy: PolicyDocument) -> Iterator[tuple[DataCategory, ProcessingEntry]]:
    """Yield every act of processing exactly once, in document order."""
    for cat in policy.categories:
        for entry in cat.entries:
            yield cat, entry
