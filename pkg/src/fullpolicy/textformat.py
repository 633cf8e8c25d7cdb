"""Canonical solid-text policy format: renderer and strict parser.

One paragraph per data category.  A paragraph is a single physical
line built from sentences joined by ``". "``; paragraphs are separated
by one blank line.  Because no field text may contain ``";"``,
``". "`` or a trailing ``"."`` (see model), the sentence and list
delimiters below are unambiguous and the two directions are exact
inverses: ``parse_text(render_text(p)) == p`` for every constructible
document, and rendering distinct documents yields distinct texts.

Sentence inventory, in fixed order inside a paragraph:

1. category heading   ``<id>. Your <data type>.``
2. source             ``Source: <text>.``
3. purposes           ``We use your <dt> for the following purposes:
                      <purpose>[, <explanation>] (<basis>[: <detail>]); ...``
4. sharing            ``We share your <dt> with <recipient> (<role>),
                      for the purpose of <purpose>[, i.e., <explanation>]
                      (<basis>[: <detail>]); ...``
5. controller negation (exactly when no controller-role recipient)
6. storage sentences, one per distinct storage rule:
   - ``We store your <dt> for a period of <text>.``           (duration)
   - ``We store your <dt> for as long as <text>.``            (criteria)
   - ``For the purposes required by <scope>, we store your <dt> ...``
   - ``For the purposes of <p1>, <p2>[, required by <scope>],
     we store your <dt> ...``

When a category uses several storage rules, the first entry's rule is
rendered without a purpose list and every other rule enumerates the
purposes it covers, so the entry-to-rule mapping survives the round
trip.  If some entries lack a storage rule (draft documents), every
rule is rendered with its purpose list and uncovered entries stay
bare.  Incomplete sharing entries render with ``unspecified``
placeholders; see docs/format.md.
"""

from __future__ import annotations

from .errors import FieldTextError, GrammarError, ModelError, UnknownLegalBasisToken
from .model import (
    BASIS_MARKER_RE,
    DataCategory,
    LegalBasis,
    PolicyDocument,
    ProcessingEntry,
    Role,
    SharingEntry,
    StorageKind,
    StorageRule,
    basis_kind_from_token,
    build_policy,
)

PREAMBLE = "We process your personal data in the following way:"
HEADING_SUFFIX = " PRIVACY POLICY"
UNSPECIFIED = "unspecified"

_DURATION_CLAUSE = "for a period of "
_CRITERIA_CLAUSE = "for as long as "


# --- rendering ---------------------------------------------------------------

def _render_basis(basis: LegalBasis | None) -> str:
    if basis is None:
        return f"({UNSPECIFIED})"
    if basis.explanation is None:
        return f"({basis.kind.token})"
    return f"({basis.kind.token}: {basis.explanation})"


def _render_purpose_item(entry: ProcessingEntry) -> str:
    item = entry.purpose
    if entry.purpose_explanation:
        item += f", {entry.purpose_explanation}"
    return f"{item} {_render_basis(entry.legal_basis)}"


def _render_sharing_item(entry: SharingEntry) -> str:
    role = entry.role.value if entry.role is not None else UNSPECIFIED
    item = f"{entry.recipient} ({role})"
    if entry.purpose_of_sharing:
        item += f", for the purpose of {entry.purpose_of_sharing}"
    else:
        item += ", for an unspecified purpose"
    if entry.purpose_explanation:
        item += f", i.e., {entry.purpose_explanation}"
    return f"{item} {_render_basis(entry.legal_basis)}"


def _storage_clause(rule: StorageRule) -> str:
    stem = _DURATION_CLAUSE if rule.kind is StorageKind.DURATION else _CRITERIA_CLAUSE
    return stem + rule.text


def _storage_sentences(cat: DataCategory) -> list[str]:
    rules: list[StorageRule] = []
    for entry in cat.entries:
        if entry.storage is not None and entry.storage not in rules:
            rules.append(entry.storage)
    if not rules:
        return []
    bare_entries = any(entry.storage is None for entry in cat.entries)

    sentences = []
    for index, rule in enumerate(rules):
        clause = f"we store your {cat.data_type} {_storage_clause(rule)}"
        if index == 0 and not bare_entries:
            if rule.scope_note is None:
                sentences.append(f"We store your {cat.data_type} {_storage_clause(rule)}")
            else:
                sentences.append(f"For the purposes required by {rule.scope_note}, {clause}")
        else:
            covered = ", ".join(e.purpose for e in cat.entries if e.storage == rule)
            scope = f", required by {rule.scope_note}" if rule.scope_note is not None else ""
            sentences.append(f"For the purposes of {covered}{scope}, {clause}")
    return sentences


def _render_paragraph(policy: PolicyDocument, cat: DataCategory) -> str:
    pieces = [cat.category_id, f"Your {cat.data_type}", f"Source: {cat.source}"]
    if cat.entries:
        items = "; ".join(_render_purpose_item(e) for e in cat.entries)
        pieces.append(f"We use your {cat.data_type} for the following purposes: {items}")
    shares = policy.sharing_for(cat.data_type)
    if shares:
        items = "; ".join(_render_sharing_item(s) for s in shares)
        pieces.append(f"We share your {cat.data_type} with {items}")
    if not any(s.role is Role.CONTROLLER for s in shares):
        pieces.append(
            f"We do not share your {cat.data_type} with recipients choosing "
            "their own purposes of processing (controllers)"
        )
    pieces.extend(_storage_sentences(cat))
    return ". ".join(pieces) + "."


def render_text(policy: PolicyDocument) -> str:
    """Render the one canonical text for a document."""
    blocks = [f"{policy.company}{HEADING_SUFFIX}", PREAMBLE]
    blocks.extend(_render_paragraph(policy, cat) for cat in policy.categories)
    return "\n\n".join(blocks) + "\n"


# --- parsing -----------------------------------------------------------------

class _ParagraphParser:
    """Sentence-level scanner for one paragraph (= one input line)."""

    def __init__(self, line_no: int):
        self.line = line_no

    def fail(self, expected: str, message: str) -> GrammarError:
        return GrammarError(self.line, expected, message)

    def _check_explanation(self, text: str, expected: str) -> None:
        # A basis-shaped parenthetical inside an explanation means a
        # ";"-separator was lost and two items merged: the model bans
        # such explanations, so a rendered document never trips this.
        if BASIS_MARKER_RE.search(" " + text):
            raise self.fail(expected, f"stray legal-basis marker inside {text!r}")

    def _split_basis(self, item: str, expected: str) -> tuple[str, LegalBasis | None]:
        left, sep, right = item.rpartition(" (")
        if not sep or not right.endswith(")"):
            raise self.fail(expected, f"item {item!r} lacks a legal-basis parenthetical")
        inner = right[:-1]
        token, colon, detail = inner.partition(": ")
        if token.strip().lower() == UNSPECIFIED and not colon:
            return left, None
        kind = basis_kind_from_token(token)
        if kind is None:
            raise UnknownLegalBasisToken(f"line {self.line}: unknown legal basis {token!r}")
        return left, LegalBasis(kind, detail if colon else None)

    def parse_purpose_item(self, item: str) -> tuple[str, str, LegalBasis]:
        left, basis = self._split_basis(item, "purposes")
        if basis is None:
            raise UnknownLegalBasisToken(f"line {self.line}: processing entry lacks a legal basis")
        purpose, _, explanation = left.partition(", ")
        self._check_explanation(explanation, "purposes")
        return purpose, explanation, basis

    def parse_sharing_item(self, item: str, data_type: str) -> SharingEntry:
        left, basis = self._split_basis(item, "sharing")
        head, sep, rest = left.partition(" (")
        if not sep or ")" not in rest:
            raise self.fail("sharing", f"item {item!r} lacks a recipient role")
        role_token, _, tail = rest.partition(")")
        role: Role | None
        if role_token == UNSPECIFIED:
            role = None
        elif role_token in ("controller", "processor"):
            role = Role(role_token)
        else:
            raise self.fail("sharing", f"unknown recipient role {role_token!r}")
        if tail.startswith(", for the purpose of "):
            tail = tail[len(", for the purpose of "):]
            purpose, _, explanation = tail.partition(", i.e., ")
        elif tail.startswith(", for an unspecified purpose"):
            purpose = ""
            remainder = tail[len(", for an unspecified purpose"):]
            if remainder == "":
                explanation = ""
            elif remainder.startswith(", i.e., "):
                explanation = remainder[len(", i.e., "):]
            else:
                raise self.fail("sharing", f"malformed sharing item {item!r}")
        else:
            raise self.fail("sharing", f"malformed sharing item {item!r}")
        self._check_explanation(explanation, "sharing")
        try:
            return SharingEntry(
                recipient=head,
                role=role,
                data_type=data_type,
                purpose_of_sharing=purpose,
                purpose_explanation=explanation,
                legal_basis=basis,
            )
        except FieldTextError as exc:
            raise self.fail("sharing", str(exc)) from exc

    def parse_clause(self, clause: str) -> tuple[StorageKind, str]:
        if clause.startswith(_CRITERIA_CLAUSE):
            return StorageKind.CRITERIA, clause[len(_CRITERIA_CLAUSE):]
        if clause.startswith(_DURATION_CLAUSE):
            return StorageKind.DURATION, clause[len(_DURATION_CLAUSE):]
        raise self.fail("storage", f"unknown storage clause {clause!r}")


def _parse_coverage_head(
    parser: _ParagraphParser, head: str, purposes: list[str]
) -> tuple[list[str], str | None]:
    """Split ``p1, p2[, required by <scope>]`` against the known purposes."""
    known = set(purposes)
    tokens = head.split(", ")
    if all(tok in known for tok in tokens):
        return tokens, None
    start = 0
    while True:
        idx = head.find(", required by ", start)
        if idx < 0:
            raise parser.fail("storage", f"cannot resolve covered purposes in {head!r}")
        tokens = head[:idx].split(", ")
        scope = head[idx + len(", required by "):]
        if scope and all(tok in known for tok in tokens):
            return tokens, scope
        start = idx + 1


def _parse_storage_sentences(
    parser: _ParagraphParser,
    pieces: list[str],
    cursor: int,
    data_type: str,
    purposes: list[str],
) -> tuple[StorageRule | None, dict[str, StorageRule]]:
    default_rule: StorageRule | None = None
    covered: dict[str, StorageRule] = {}
    seen: list[StorageRule] = []
    store_stem = f"We store your {data_type} "
    scoped_stem = "For the purposes required by "
    cover_stem = "For the purposes of "
    anchor = f", we store your {data_type} "

    for position, piece in enumerate(pieces[cursor:]):
        if piece.startswith(store_stem):
            if position != 0:
                raise parser.fail("storage", "the default storage sentence must come first")
            kind, value = parser.parse_clause(piece[len(store_stem):])
            rule = StorageRule(kind, value)
            default_rule = rule
        elif piece.startswith(scoped_stem):
            if position != 0:
                raise parser.fail("storage", "the default storage sentence must come first")
            body = piece[len(scoped_stem):]
            idx = body.find(anchor)
            if idx <= 0:
                raise parser.fail("storage", f"malformed storage sentence {piece!r}")
            kind, value = parser.parse_clause(body[idx + len(anchor):])
            rule = StorageRule(kind, value, scope_note=body[:idx])
            default_rule = rule
        elif piece.startswith(cover_stem):
            body = piece[len(cover_stem):]
            rule = None
            names: list[str] = []
            start = 0
            while rule is None:
                idx = body.find(anchor, start)
                if idx <= 0:
                    raise parser.fail("storage", f"malformed storage sentence {piece!r}")
                try:
                    names, scope = _parse_coverage_head(parser, body[:idx], purposes)
                    kind, value = parser.parse_clause(body[idx + len(anchor):])
                except GrammarError:
                    start = idx + 1
                    continue
                rule = StorageRule(kind, value, scope_note=scope)
            for name in names:
                if name in covered:
                    raise parser.fail("storage", f"purpose {name!r} covered twice")
                covered[name] = rule
        else:
            raise parser.fail("storage", f"unrecognized sentence {piece!r}")
        if rule in seen:
            raise parser.fail("storage", "duplicate storage rule")
        seen.append(rule)
    return default_rule, covered


def _parse_paragraph(
    parser: _ParagraphParser, text: str
) -> tuple[DataCategory, list[SharingEntry]]:
    if not text.endswith("."):
        raise parser.fail("category-heading", "paragraph must end with '.'")
    pieces = text[:-1].split(". ")
    if len(pieces) < 3:
        raise parser.fail("category-heading", "paragraph too short")
    category_id = pieces[0]
    if not pieces[1].startswith("Your "):
        raise parser.fail("category-heading", f"expected 'Your <data type>', got {pieces[1]!r}")
    data_type = pieces[1][len("Your "):]
    if not pieces[2].startswith("Source: "):
        raise parser.fail("source", f"expected 'Source: ...', got {pieces[2]!r}")
    source = pieces[2][len("Source: "):]

    cursor = 3
    raw_entries: list[tuple[str, str, LegalBasis]] = []
    stem = f"We use your {data_type} for the following purposes: "
    if cursor < len(pieces) and pieces[cursor].startswith(stem):
        for item in pieces[cursor][len(stem):].split("; "):
            raw_entries.append(parser.parse_purpose_item(item))
        cursor += 1

    sharing: list[SharingEntry] = []
    stem = f"We share your {data_type} with "
    if cursor < len(pieces) and pieces[cursor].startswith(stem):
        for item in pieces[cursor][len(stem):].split("; "):
            sharing.append(parser.parse_sharing_item(item, data_type))
        cursor += 1

    negation = (
        f"We do not share your {data_type} with recipients choosing "
        "their own purposes of processing (controllers)"
    )
    has_negation = cursor < len(pieces) and pieces[cursor] == negation
    if has_negation:
        cursor += 1
    has_controller = any(s.role is Role.CONTROLLER for s in sharing)
    if has_negation == has_controller:
        raise parser.fail(
            "controller-negation",
            "the no-controllers sentence must appear exactly when no "
            "controller-role recipient is listed",
        )

    purposes = [p for p, _, _ in raw_entries]
    default_rule, covered = _parse_storage_sentences(parser, pieces, cursor, data_type, purposes)

    try:
        entries = tuple(
            ProcessingEntry(
                purpose=purpose,
                purpose_explanation=explanation,
                legal_basis=basis,
                storage=covered.get(purpose, default_rule),
            )
            for purpose, explanation, basis in raw_entries
        )
        category = DataCategory(
            category_id=category_id, data_type=data_type, source=source, entries=entries
        )
    except (FieldTextError, ModelError) as exc:
        raise parser.fail("purposes", str(exc)) from exc
    return category, sharing


def parse_text(text: str) -> PolicyDocument:
    """Parse canonical solid text into a draft-mode document."""
    if not text.endswith("\n"):
        raise GrammarError(1, "document", "input must end with a newline")
    blocks = text[:-1].split("\n\n")
    if len(blocks) < 2:
        raise GrammarError(1, "heading", "missing heading or preamble")
    for index, block in enumerate(blocks):
        if "\n" in block:
            raise GrammarError(
                2 * index + 1,
                "paragraph",
                "paragraphs must be single lines separated by one blank line",
            )
    if not blocks[0].endswith(HEADING_SUFFIX) or blocks[0] == HEADING_SUFFIX:
        raise GrammarError(1, "heading", f"expected '<company>{HEADING_SUFFIX}'")
    company = blocks[0][: -len(HEADING_SUFFIX)]
    if blocks[1] != PREAMBLE:
        raise GrammarError(3, "preamble", f"expected {PREAMBLE!r}")

    categories: list[DataCategory] = []
    sharing: list[SharingEntry] = []
    for index, block in enumerate(blocks[2:], start=2):
        parser = _ParagraphParser(2 * index + 1)
        category, shares = _parse_paragraph(parser, block)
        categories.append(category)
        sharing.extend(shares)
    return build_policy(company, categories, sharing, mode="draft")
