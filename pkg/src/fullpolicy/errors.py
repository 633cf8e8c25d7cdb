"""Exception taxonomy shared across the toolkit.

Builder errors signal documents that cannot be represented at all;
format errors signal unparseable input; lookup errors signal question
parameters that do not resolve against a document.  Completeness
defects (missing storage, incomplete sharing entries, ...) are *not*
exceptions: they are reported as findings by the validator.
"""

from __future__ import annotations


class PolicyError(Exception):
    """Base class for all toolkit errors."""


# --- model construction -------------------------------------------------

class ModelError(PolicyError):
    """Document violates a construction-time integrity rule."""


class FieldTextError(ModelError):
    """A text field contains characters reserved by the canonical formats."""


class DuplicateDataType(ModelError):
    """Two data categories carry the same data type (case-insensitive)."""


class DuplicateCategoryId(ModelError):
    """Two data categories carry the same category identifier."""


class DuplicatePurpose(ModelError):
    """Two processing entries in one category share a purpose name."""


class DuplicateSharingEntry(ModelError):
    """Two sharing entries repeat a (recipient, data type, purpose) triple."""


class UnresolvedSharingReference(ModelError):
    """A sharing entry names a data type with no matching category."""


class MissingBasisExplanation(ModelError):
    """Strict mode: a basis kind that requires an explanation lacks one."""


class EmptyCategory(ModelError):
    """Strict mode: a data category discloses no processing purpose."""


class IncompleteSharingEntry(ModelError):
    """Strict mode: a sharing entry lacks its role, purpose, or basis."""


class MissingStorageRule(ModelError):
    """Strict mode: a processing entry lacks its storage rule."""


# --- serialization formats ----------------------------------------------

class FormatError(PolicyError):
    """Input does not conform to a policy serialization format."""


class HeaderMismatch(FormatError):
    """A sheet's header row differs from the declared column names."""


class RaggedRow(FormatError):
    """A sheet row has the wrong number of fields."""


class MissingField(FormatError):
    """A sheet row leaves a mandatory cell empty."""


class UnknownLegalBasisToken(FormatError):
    """A legal-basis cell or clause is not one of the six known tokens."""


class UnknownRoleToken(FormatError):
    """A recipient-role cell is neither 'controller' nor 'processor'."""


class StorageSyntaxError(FormatError):
    """A storage cell does not follow the 'duration:/criteria:' syntax."""


class GrammarError(FormatError):
    """Solid-text input deviates from the canonical grammar.

    Carries the 1-based input line and the name of the sentence
    template the parser was trying to match.
    """

    def __init__(self, line: int, expected: str, message: str):
        super().__init__(f"line {line}: expected {expected}: {message}")
        self.line = line
        self.expected = expected


# --- question answering --------------------------------------------------

class QuestionError(PolicyError):
    """A question parameter does not resolve against the document."""


class UnknownDataType(QuestionError):
    """Question names a data type the document never discloses."""


class UnknownBasisKind(QuestionError):
    """Question names a string that is not a legal-basis kind."""


class BadQuestionSpec(QuestionError):
    """A question-spec text encoding cannot be decoded."""


# --- grading -------------------------------------------------------------

class AliasTargetUnknown(PolicyError):
    """An alias maps to a name that is neither in the document nor
    registered as a known external name."""


class LexiconError(PolicyError):
    """A vague-phrase lexicon is empty or unreadable."""


# --- experiment ----------------------------------------------------------

class TransportFailure(PolicyError):
    """The answer source failed mid-run; the run is recorded incomplete."""


class PolicyTooLong(PolicyError):
    """Pre-flight size estimate exceeds the configured context budget."""


class ConfigError(PolicyError):
    """An experiment configuration file is malformed."""


# --- reporting -----------------------------------------------------------

class IncompleteGrid(PolicyError):
    """Run records do not cover the full setting/session/run/question grid.

    Aggregation reports this but still produces a partial table; it is
    raised only when a caller asks for strict grid coverage.
    """
