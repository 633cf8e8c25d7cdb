"""Disclosure-completeness checks and the vague-phrase lint.

``validate`` re-checks a document (however constructed) against the
per-act disclosure checklist and returns findings instead of raising:
drafts parsed from incomplete files must be representable so that
their gaps can be reported.

Error rules:

* E1  data category with no disclosed purpose
* E2  processing entry without a storage rule
* E3  legal basis requiring a named explanation without one
      (legitimate interest, legal obligation; processing and sharing)
* E4  sharing entry missing its role, purpose of sharing, or basis
* E5  sharing entry referencing an undisclosed data type

``lint_vagueness`` flags lexicon phrases (W-VAGUE warnings) in the
purpose, purpose-explanation and data-type fields.  Warnings never
change the error set.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import LexiconError
from .model import PolicyDocument

DEFAULT_VAGUE_PHRASES = (
    "improve our service",
    "use of our service",
    "develop new services",
    "research purposes",
    "personalised services",
)


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Finding:
    severity: Severity
    rule_id: str
    location: tuple[str, str]  # (anchor, field), e.g. ("category:1", "entries[2].storage")
    message: str

    def format(self) -> str:
        anchor, field = self.location
        return f"{self.severity.value} {self.rule_id} {anchor} {field}: {self.message}"


def _finding(
    severity: Severity,
    rule_id: str,
    anchor: str,
    field: str,
    message: str,
    position: tuple[int, ...],
) -> tuple[tuple, Finding]:
    return (position + (rule_id,), Finding(severity, rule_id, (anchor, field), message))


def validate(policy: PolicyDocument) -> list[Finding]:
    """Deterministic completeness findings, ordered by document position."""
    keyed: list[tuple[tuple, Finding]] = []
    for ci, cat in enumerate(policy.categories):
        anchor = f"category:{cat.category_id}"
        if not cat.entries:
            keyed.append(
                _finding(
                    Severity.ERROR, "E1", anchor, "entries",
                    f"data type {cat.data_type!r} discloses no purpose of processing",
                    (0, ci, 0),
                )
            )
        for ei, entry in enumerate(cat.entries):
            if entry.storage is None:
                keyed.append(
                    _finding(
                        Severity.ERROR, "E2", anchor, f"entries[{ei}].storage",
                        f"purpose {entry.purpose!r} has no storage period or criteria",
                        (0, ci, ei + 1),
                    )
                )
            basis = entry.legal_basis
            if basis.kind.needs_explanation and basis.explanation is None:
                keyed.append(
                    _finding(
                        Severity.ERROR, "E3", anchor, f"entries[{ei}].legal_basis",
                        f"purpose {entry.purpose!r}: {basis.kind.token} named without explanation",
                        (0, ci, ei + 1),
                    )
                )
    for si, entry in enumerate(policy.sharing):
        anchor = f"sharing:{si}"
        missing = []
        if entry.role is None:
            missing.append("role")
        if not entry.purpose_of_sharing:
            missing.append("purpose of sharing")
        if entry.legal_basis is None:
            missing.append("legal basis")
        if missing:
            keyed.append(
                _finding(
                    Severity.ERROR, "E4", anchor, ",".join(m.replace(" ", "_") for m in missing),
                    f"recipient {entry.recipient!r} lacks {', '.join(missing)}",
                    (1, si, 0),
                )
            )
        basis = entry.legal_basis
        if basis is not None and basis.kind.needs_explanation and basis.explanation is None:
            keyed.append(
                _finding(
                    Severity.ERROR, "E3", anchor, "legal_basis",
                    f"recipient {entry.recipient!r}: {basis.kind.token} named without explanation",
                    (1, si, 0),
                )
            )
        if policy.category_for(entry.data_type) is None:
            keyed.append(
                _finding(
                    Severity.ERROR, "E5", anchor, "data_type",
                    f"recipient {entry.recipient!r} receives undisclosed data type "
                    f"{entry.data_type!r}",
                    (1, si, 0),
                )
            )
    keyed.sort(key=lambda pair: pair[0])
    return [finding for _, finding in keyed]


def load_lexicon(text: str) -> list[str]:
    """Parse a lexicon file: one phrase per line, '#' comments."""
    phrases = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            phrases.append(line)
    if not phrases:
        raise LexiconError("vague-phrase lexicon is empty")
    return phrases


def lint_vagueness(
    policy: PolicyDocument, lexicon: list[str] | tuple[str, ...] = DEFAULT_VAGUE_PHRASES
) -> list[Finding]:
    """W-VAGUE warning per case-insensitive lexicon hit."""
    if not lexicon:
        raise LexiconError("vague-phrase lexicon is empty")
    phrases = [p.lower() for p in lexicon]

    keyed: list[tuple[tuple, Finding]] = []

    def scan(anchor: str, field: str, text: str, position: tuple[int, ...]) -> None:
        lowered = text.lower()
        for pi, phrase in enumerate(phrases):
            if phrase in lowered:
                keyed.append(
                    _finding(
                        Severity.WARNING, "W-VAGUE", anchor, field,
                        f"vague phrase {lexicon[pi]!r} in {field}",
                        position + (pi,),
                    )
                )

    for ci, cat in enumerate(policy.categories):
        anchor = f"category:{cat.category_id}"
        scan(anchor, "data_type", cat.data_type, (0, ci, 0, 0))
        for ei, entry in enumerate(cat.entries):
            scan(anchor, f"entries[{ei}].purpose", entry.purpose, (0, ci, ei + 1, 0))
            scan(
                anchor,
                f"entries[{ei}].purpose_explanation",
                entry.purpose_explanation,
                (0, ci, ei + 1, 1),
            )
    for si, entry in enumerate(policy.sharing):
        anchor = f"sharing:{si}"
        scan(anchor, "purpose_of_sharing", entry.purpose_of_sharing, (1, si, 0, 0))
        scan(anchor, "purpose_explanation", entry.purpose_explanation, (1, si, 0, 1))

    keyed.sort(key=lambda pair: pair[0])
    return [finding for _, finding in keyed]
