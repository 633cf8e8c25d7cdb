"""Two-sheet tabular policy format.

Sheet one carries the processing disclosures, one row per act of
processing; consecutive rows sharing the (category identifier, data
type, source) triple belong to one data category.  Sheet two carries
the sharing disclosures, one row per sharing entry.  Both sheets are
UTF-8 comma-separated values with double-quote escaping, a fixed
header row, and a single line feed as terminator.

The storage cell packs a storage rule into one column:

    duration: <text>
    criteria: <text>
    duration: <text>; required by: <scope note>

An empty storage cell means the entry has no rule yet (draft); an
empty legal-basis-explanation cell means the basis carries none.  A
row whose purpose/basis/storage cells are all empty declares a data
category with no disclosed purpose (draft; the validator flags it).
"""

from __future__ import annotations

import csv
import io

from .errors import (
    HeaderMismatch,
    MissingField,
    RaggedRow,
    StorageSyntaxError,
    UnknownLegalBasisToken,
    UnknownRoleToken,
)
from .model import (
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

PROCESSING_HEADER = (
    "category identifier",
    "data type",
    "source",
    "purpose",
    "purpose explanation",
    "legal basis",
    "legal basis explanation",
    "storage period",
)

SHARING_HEADER = (
    "recipient",
    "role",
    "data type",
    "purpose of sharing",
    "purpose explanation",
    "legal basis",
    "legal basis explanation",
)

_SCOPE_SEP = "; required by: "


def encode_storage_cell(rule: StorageRule | None) -> str:
    if rule is None:
        return ""
    cell = f"{rule.kind.value}: {rule.text}"
    if rule.scope_note is not None:
        cell += f"{_SCOPE_SEP}{rule.scope_note}"
    return cell


def decode_storage_cell(cell: str) -> StorageRule | None:
    if cell == "":
        return None
    token, sep, rest = cell.partition(": ")
    if not sep:
        raise StorageSyntaxError(f"storage cell {cell!r} lacks a 'duration:'/'criteria:' prefix")
    try:
        kind = StorageKind(token.strip().lower())
    except ValueError:
        raise StorageSyntaxError(f"unknown storage kind {token!r}") from None
    text, sep, scope = rest.partition(_SCOPE_SEP)
    return StorageRule(kind, text, scope_note=scope if sep else None)


def _parse_basis(token: str, explanation: str, where: str) -> LegalBasis | None:
    if token == "":
        if explanation:
            raise MissingField(f"{where}: legal basis explanation given without a basis")
        return None
    kind = basis_kind_from_token(token)
    if kind is None:
        raise UnknownLegalBasisToken(f"{where}: unknown legal basis {token!r}")
    return LegalBasis(kind, explanation or None)


def _rows(stream: str, header: tuple[str, ...], sheet: str) -> list[list[str]]:
    reader = csv.reader(io.StringIO(stream, newline=""))
    rows = list(reader)
    if not rows or tuple(rows[0]) != header:
        raise HeaderMismatch(f"{sheet} sheet header must be exactly {','.join(header)}")
    for number, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise RaggedRow(f"{sheet} sheet row {number}: expected {len(header)} fields, got {len(row)}")
    return rows[1:]


DEFAULT_COMPANY = "Unnamed Controller"


def parse_tabular(
    processing_stream: str,
    sharing_stream: str,
    company: str = DEFAULT_COMPANY,
) -> PolicyDocument:
    """Parse the two sheets into a draft-mode document.

    The tabular format has no company slot, so the document is labeled
    with ``company`` (a placeholder unless the caller knows better).
    """
    categories: list[DataCategory] = []
    current_key: tuple[str, str, str] | None = None
    current_entries: list[ProcessingEntry] = []

    def flush() -> None:
        nonlocal current_key, current_entries
        if current_key is not None:
            cid, data_type, source = current_key
            categories.append(
                DataCategory(
                    category_id=cid,
                    data_type=data_type,
                    source=source,
                    entries=tuple(current_entries),
                )
            )
        current_key = None
        current_entries = []

    for number, row in enumerate(_rows(processing_stream, PROCESSING_HEADER, "processing"), start=2):
        cid, data_type, source, purpose, explanation, basis_tok, basis_expl, storage_cell = row
        key = (cid, data_type, source)
        if key != current_key:
            flush()
            current_key = key
        where = f"processing sheet row {number}"
        if purpose == "" and basis_tok == "" and basis_expl == "" and storage_cell == "":
            if current_entries:
                raise MissingField(f"{where}: purpose missing")
            continue  # bare category row
        if purpose == "":
            raise MissingField(f"{where}: purpose missing")
        basis = _parse_basis(basis_tok, basis_expl, where)
        if basis is None:
            raise UnknownLegalBasisToken(f"{where}: legal basis missing")
        current_entries.append(
            ProcessingEntry(
                purpose=purpose,
                purpose_explanation=explanation,
                legal_basis=basis,
                storage=decode_storage_cell(storage_cell),
            )
        )
    flush()

    sharing: list[SharingEntry] = []
    for number, row in enumerate(_rows(sharing_stream, SHARING_HEADER, "sharing"), start=2):
        recipient, role_tok, data_type, purpose, explanation, basis_tok, basis_expl = row
        where = f"sharing sheet row {number}"
        if recipient == "":
            raise MissingField(f"{where}: recipient missing")
        if data_type == "":
            raise MissingField(f"{where}: data type missing")
        role: Role | None
        if role_tok == "":
            role = None
        else:
            try:
                role = Role(role_tok.strip().lower())
            except ValueError:
                raise UnknownRoleToken(f"{where}: unknown role {role_tok!r}") from None
        sharing.append(
            SharingEntry(
                recipient=recipient,
                role=role,
                data_type=data_type,
                purpose_of_sharing=purpose,
                purpose_explanation=explanation,
                legal_basis=_parse_basis(basis_tok, basis_expl, where),
            )
        )

    return build_policy(company, categories, sharing, mode="draft")


def render_tabular(policy: PolicyDocument) -> tuple[str, str]:
    """Render the canonical (processing, sharing) sheet pair."""
    processing = io.StringIO(newline="")
    writer = csv.writer(processing, lineterminator="\n")
    writer.writerow(PROCESSING_HEADER)
    for cat in policy.categories:
        if not cat.entries:
            writer.writerow([cat.category_id, cat.data_type, cat.source, "", "", "", "", ""])
        for entry in cat.entries:
            writer.writerow(
                [
                    cat.category_id,
                    cat.data_type,
                    cat.source,
                    entry.purpose,
                    entry.purpose_explanation,
                    entry.legal_basis.kind.token,
                    entry.legal_basis.explanation or "",
                    encode_storage_cell(entry.storage),
                ]
            )

    sharing = io.StringIO(newline="")
    writer = csv.writer(sharing, lineterminator="\n")
    writer.writerow(SHARING_HEADER)
    for entry in policy.sharing:
        basis = entry.legal_basis
        writer.writerow(
            [
                entry.recipient,
                entry.role.value if entry.role is not None else "",
                entry.data_type,
                entry.purpose_of_sharing,
                entry.purpose_explanation,
                basis.kind.token if basis is not None else "",
                (basis.explanation or "") if basis is not None else "",
            ]
        )

    return processing.getvalue(), sharing.getvalue()
