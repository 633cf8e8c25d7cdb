"""Grades free-text answers against oracle answer keys.

The taxonomy has four cases: an answer is *correct* when it covers the
key exactly; *false negative* when it omits key items; *false
positive* when it adds items that do occur in the policy document but
do not answer the question; and a *hallucination* when it names
entities the document never mentions.  Boolean questions additionally
get *wrong_boolean* when the stated polarity contradicts the key.

Mention extraction is vocabulary-driven: token-boundary,
case-insensitive matching of candidate surfaces (and their aliases),
longest match winning on overlap.  Entities outside the vocabulary
can, by definition, not be found that way, so a separate scan flags
capitalized phrases that occur nowhere in the policy text; those are
the hallucinated names.  Phrases that do occur verbatim in the policy
(quoted explanations, statute names) are treated as context, not as
claimed answer entities.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .errors import AliasTargetUnknown, LexiconError
from .model import PolicyDocument
from .oracle import AnswerKey, AnswerKind, canon
from .textformat import render_text

DEFAULT_NEGATION_CUES = (
    "does not",
    "no,",
    "not mentioned",
    "nothing in the policy",
)


class Verdict(Enum):
    CORRECT = "correct"
    FALSE_NEGATIVE = "false_negative"
    FALSE_POSITIVE = "false_positive"
    HALLUCINATION = "hallucination"
    WRONG_BOOLEAN = "wrong_boolean"


@dataclass(frozen=True)
class Grade:
    matched: frozenset[str]
    missing: frozenset[str]
    extra_in_document: frozenset[str]
    extra_not_in_document: frozenset[str]
    negation_detected: bool
    verdict: Verdict

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "matched": sorted(self.matched),
            "missing": sorted(self.missing),
            "extra_in_document": sorted(self.extra_in_document),
            "extra_not_in_document": sorted(self.extra_not_in_document),
            "negation_detected": self.negation_detected,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Grade":
        return cls(
            matched=frozenset(data["matched"]),
            missing=frozenset(data["missing"]),
            extra_in_document=frozenset(data["extra_in_document"]),
            extra_not_in_document=frozenset(data["extra_not_in_document"]),
            negation_detected=bool(data["negation_detected"]),
            verdict=Verdict(data["verdict"]),
        )


@dataclass(frozen=True)
class EntityVocabulary:
    """Canonical entity strings of one policy plus the alias table.

    ``document_text`` is the lowercased full rendering, used to decide
    whether an out-of-vocabulary phrase was at least taken from the
    document.
    """

    document_terms: frozenset[str]
    alias_table: dict[str, str]
    external_terms: frozenset[str]
    document_text: str

    def alias_targets(self) -> frozenset[str]:
        return frozenset(self.alias_table.values())


def parse_alias_file(text: str) -> tuple[dict[str, str], set[str]]:
    """Parse ``alias => canonical`` lines; ``external: name`` lines
    register known-external targets."""
    aliases: dict[str, str] = {}
    externals: set[str] = set()
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.lower().startswith("external:"):
            name = canon(line.split(":", 1)[1])
            if not name:
                raise AliasTargetUnknown(f"alias file line {number}: empty external name")
            externals.add(name)
            continue
        alias, sep, target = line.partition("=>")
        if not sep or not alias.strip() or not target.strip():
            raise AliasTargetUnknown(
                f"alias file line {number}: expected 'alias => canonical'"
            )
        aliases[canon(alias)] = canon(target)
    return aliases, externals


def build_vocabulary(policy: PolicyDocument, alias_text: str | None = None) -> EntityVocabulary:
    """Collect the policy's entity-bearing fields and load aliases."""
    terms: set[str] = set()
    for cat in policy.categories:
        terms.add(canon(cat.data_type))
        for entry in cat.entries:
            terms.add(canon(entry.purpose))
            terms.add(entry.legal_basis.kind.token)
    for share in policy.sharing:
        terms.add(canon(share.recipient))
        if share.purpose_of_sharing:
            terms.add(canon(share.purpose_of_sharing))
        if share.legal_basis is not None:
            terms.add(share.legal_basis.kind.token)
    terms.discard("")

    aliases: dict[str, str] = {}
    externals: set[str] = set()
    if alias_text is not None:
        aliases, externals = parse_alias_file(alias_text)
        for alias, target in aliases.items():
            if target not in terms and target not in externals:
                raise AliasTargetUnknown(
                    f"alias {alias!r} targets {target!r}, which is neither a document "
                    "term nor a registered external name"
                )

    return EntityVocabulary(
        document_terms=frozenset(terms),
        alias_table=aliases,
        external_terms=frozenset(externals),
        document_text=render_text(policy).lower(),
    )


# --- mention extraction -------------------------------------------------------

def _surface_pattern(surface: str) -> re.Pattern[str]:
    escaped = re.escape(surface).replace(r"\ ", r"\s+").replace(" ", r"\s+")
    return re.compile(rf"(?<!\w){escaped}(?!\w)", re.IGNORECASE)


def _surfaces_for(candidate: str, vocab: EntityVocabulary) -> list[str]:
    surfaces = [candidate]
    for alias, target in vocab.alias_table.items():
        if target == candidate:
            surfaces.append(alias)
    return surfaces


def _scan_candidates(
    answer: str, vocab: EntityVocabulary, candidate_space: Iterable[str]
) -> list[tuple[int, int, str]]:
    """All candidate hits, longest match winning on overlap."""
    hits: list[tuple[int, int, str]] = []
    for candidate in candidate_space:
        for surface in _surfaces_for(candidate, vocab):
            if not surface:
                continue
            for match in _surface_pattern(surface).finditer(answer):
                hits.append((match.start(), match.end(), candidate))
    hits.sort(key=lambda h: (-(h[1] - h[0]), h[0], h[2]))
    kept: list[tuple[int, int, str]] = []
    for start, end, candidate in hits:
        if any(start < k_end and k_start < end for k_start, k_end, _ in kept):
            continue
        kept.append((start, end, candidate))
    kept.sort()
    return kept


def extract_mentions(
    answer: str, vocab: EntityVocabulary, candidate_space: Iterable[str]
) -> frozenset[str]:
    """Every candidate whose surface form or alias occurs in the answer."""
    return frozenset(c for _, _, c in _scan_candidates(answer, vocab, candidate_space))


_CAP_TOKEN = r"[A-Z][A-Za-z0-9&'’-]*"
_CAP_PHRASE_RE = re.compile(rf"\b{_CAP_TOKEN}(?:[ \t]+{_CAP_TOKEN})*")


def _sentence_initial(answer: str, start: int) -> bool:
    before = answer[:start].rstrip()
    return before == "" or before[-1] in ".!?:;\"'"


def _unknown_entities(
    answer: str,
    vocab: EntityVocabulary,
    kept: list[tuple[int, int, str]],
    skip_terms: set[str],
) -> frozenset[str]:
    """Capitalized phrases that match no candidate and never occur in
    the policy text: the hallucinated names."""
    unknowns: set[str] = set()
    for match in _CAP_PHRASE_RE.finditer(answer):
        start, end = match.span()
        if any(start < k_end and k_start < end for k_start, k_end, _ in kept):
            continue
        phrase = match.group()
        if " " not in phrase and len(phrase) < 2:
            continue
        if " " not in phrase and _sentence_initial(answer, start):
            continue
        c = canon(phrase)
        if c in vocab.document_terms or c in skip_terms:
            continue
        if c in vocab.document_text:
            continue
        unknowns.add(c)
    return frozenset(unknowns)


# --- polarity ----------------------------------------------------------------

def load_negation_cues(text: str) -> list[str]:
    cues = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            cues.append(line.lower())
    if not cues:
        raise LexiconError("negation-cue list is empty")
    return cues


def _stated_polarity(
    answer: str,
    subject_patterns: list[re.Pattern[str]],
    cues: Sequence[str],
) -> bool:
    sentences = re.split(r"(?<=[.!?])\s+", answer)
    for sentence in sentences:
        if any(p.search(sentence) for p in subject_patterns):
            low = sentence.lower()
            if any(cue in low for cue in cues):
                return False
    if re.match(r"\s*no\b", answer, re.IGNORECASE):
        return False
    if re.match(r"\s*yes\b", answer, re.IGNORECASE):
        return True
    low = answer.lower()
    if any(cue in low for cue in cues):
        return False
    return True


# --- grading -----------------------------------------------------------------

def grade(
    answer: str,
    key: AnswerKey,
    vocab: EntityVocabulary,
    negation_cues: Sequence[str] = DEFAULT_NEGATION_CUES,
) -> Grade:
    """Classify one free-text answer against its key.

    Verdict precedence when several sets are non-empty:
    hallucination > false positive > false negative.  Extra prose that
    introduces no entities never affects the verdict.
    """
    if key.kind is AnswerKind.BOOLEAN:
        return _grade_boolean(answer, key, vocab, negation_cues)

    # The question's own parameter (data type, basis, recipient) gets
    # echoed by any natural answer; it is never an answer entity.
    subject = {key.subject} if key.subject else set()
    candidates = (
        set(key.entities) | set(vocab.document_terms) | set(vocab.alias_targets()) | subject
    )
    kept = _scan_candidates(answer, vocab, candidates)
    mentions = frozenset(c for _, _, c in kept)
    unknowns = _unknown_entities(answer, vocab, kept, subject)

    matched = mentions & key.entities
    missing = key.entities - mentions
    extras = mentions - key.entities - subject
    extra_in_doc = extras & vocab.document_terms
    extra_not_in_doc = (extras - vocab.document_terms) | unknowns

    if extra_not_in_doc:
        verdict = Verdict.HALLUCINATION
    elif extra_in_doc:
        verdict = Verdict.FALSE_POSITIVE
    elif missing:
        verdict = Verdict.FALSE_NEGATIVE
    else:
        verdict = Verdict.CORRECT
    return Grade(
        matched=matched,
        missing=missing,
        extra_in_document=extra_in_doc,
        extra_not_in_document=extra_not_in_doc,
        negation_detected=False,
        verdict=verdict,
    )


def _grade_boolean(
    answer: str,
    key: AnswerKey,
    vocab: EntityVocabulary,
    negation_cues: Sequence[str],
) -> Grade:
    subject = key.subject or ""
    candidates = set(vocab.document_terms) | set(vocab.alias_targets())
    if subject:
        candidates.add(subject)
    kept = _scan_candidates(answer, vocab, candidates)
    mentions = frozenset(c for _, _, c in kept)

    # Mentioning the questioned recipient or document entities is how a
    # boolean answer is phrased; only names foreign to both count.
    unknowns = _unknown_entities(answer, vocab, kept, {subject})
    extra_not_in_doc = (
        frozenset(m for m in mentions if m not in vocab.document_terms and m != subject)
        | unknowns
    )

    subject_patterns = [_surface_pattern(s) for s in _surfaces_for(subject, vocab) if s]
    polarity = _stated_polarity(answer, subject_patterns, negation_cues)

    if extra_not_in_doc:
        verdict = Verdict.HALLUCINATION
    elif polarity != key.value:
        verdict = Verdict.WRONG_BOOLEAN
    else:
        verdict = Verdict.CORRECT
    return Grade(
        matched=frozenset(),
        missing=frozenset(),
        extra_in_document=frozenset(),
        extra_not_in_document=extra_not_in_doc,
        negation_detected=not polarity,
        verdict=verdict,
    )


def render_key_enumeration(key: AnswerKey) -> str:
    """The plain enumeration of a key; grades as correct against it."""
    if key.kind is AnswerKind.BOOLEAN:
        return "Yes." if key.value else "No."
    if not key.display:
        return "Nothing."
    return ", ".join(key.display) + "."
