"""Bundled fixtures: the Orderoo mock policy and the benchmark run grids.

``sample_policy`` is the desk-scale mock policy of Orderoo Inc., a
food-delivery company; ``email_paragraph_policy`` is just its email
paragraph.  Every data type except geolocation is shared with
Cloud711, which is what makes the classic false-positive answer to the
geolocation-recipients question representable.

``SETTING_LABEL_GRIDS`` holds the per-run outcome labels of the four
benchmark settings (two model generations, short and long prompts; ten
runs each as two five-run sessions).  ``fixture_run_records``
rebuilds those outcomes as fully graded run records by synthesizing
answers that the real grader classifies with exactly the labeled
verdicts, so aggregation can be exercised end to end.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .experiment import (
    ExperimentConfig,
    Message,
    OPENER,
    RetryOutcome,
    RunRecord,
    compose_prompt,
    write_offline_transcript,
)
from .grading import EntityVocabulary, Verdict, build_vocabulary, grade, render_key_enumeration
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
)
from .oracle import AnswerKey, answer, parse_question

def data_text(name: str) -> str:
    """Read a bundled data file (see src/fullpolicy/data/)."""
    return resources.files("fullpolicy.data").joinpath(name).read_text(encoding="utf-8")


_CN = LegalBasisKind.CONTRACTUAL_NECESSITY
_LO = LegalBasisKind.LEGAL_OBLIGATION
_LI = LegalBasisKind.LEGITIMATE_INTEREST
_CO = LegalBasisKind.CONSENT

_ACCOUNT_LIFETIME = StorageRule(
    StorageKind.CRITERIA,
    "you're using our services, i.e., until you delete your account",
)

_CLOUD_BACKUP = dict(
    recipient="Cloud711",
    role=Role.PROCESSOR,
    purpose_of_sharing="data storage and backup",
    purpose_explanation="storing our IT operations on their servers",
    legal_basis=LegalBasis(_LI, "lowering the cost of operation and keeping the data safe"),
)

_ACCOUNTING = dict(
    recipient="CoolAccountants",
    role=Role.PROCESSOR,
    purpose_of_sharing="accounting",
    purpose_explanation="reviewing our financial records and keeping them in order",
    legal_basis=LegalBasis(_LO, "Accounting Act"),
)


def _email_category() -> DataCategory:
    lifetime = StorageRule(
        StorageKind.CRITERIA,
        "you're using our services, i.e., until you delete your account, PLUS THREE MONTHS",
    )
    statutory = StorageRule(
        StorageKind.DURATION,
        "five years after your last transaction",
        scope_note="the Receipts Act, Accounting Act, and the Code of Criminal Procedure",
    )
    return DataCategory(
        category_id="1",
        data_type="email address",
        source="You provide us with your email address when registering for the service",
        entries=(
            ProcessingEntry(
                "unique identifier",
                "it serves as a unique identifier allowing you to set up and log in to your account",
                LegalBasis(_CN),
                lifetime,
            ),
            ProcessingEntry(
                "account access",
                "to let you reset your password if you forget it",
                LegalBasis(_CN),
                lifetime,
            ),
            ProcessingEntry(
                "transaction-related-communication",
                "to send you receipts of your orders",
                LegalBasis(_LO, "to issue receipts, according to the Receipts Act"),
                statutory,
            ),
            ProcessingEntry(
                "distribution of own advertising",
                "to send you advertisements of our own services, new functionalities or new order options",
                LegalBasis(
                    _LI,
                    "informing the consumers about the available offers and features, and promoting them",
                ),
                lifetime,
            ),
            ProcessingEntry(
                "distribution of third-party marketing",
                "to send you advertisements of vendors selling their products on our site",
                LegalBasis(
                    _LI,
                    "to subsidize the price of the service with payments from the vendors we promote",
                ),
                lifetime,
            ),
            ProcessingEntry(
                "tracking transaction history",
                "we keep it as a part of your order history data in case it becomes "
                "necessary to reveal it to investigative authorities",
                LegalBasis(_LO, "Accounting Act and Code of Criminal Procedure"),
                statutory,
            ),
            ProcessingEntry(
                "profiling",
                "we use the domain name part of your email address when profiling "
                "(see the separate section at the bottom of the document)",
                LegalBasis(_LI, "matching our offers to consumer segments"),
                lifetime,
            ),
        ),
    )


def _email_sharing() -> list[SharingEntry]:
    return [
        SharingEntry(data_type="email address", **_CLOUD_BACKUP),
        SharingEntry(
            recipient="Microsoft",
            role=Role.PROCESSOR,
            data_type="email address",
            purpose_of_sharing="facilitating communication",
            purpose_explanation="sending our own emails",
            legal_basis=LegalBasis(
                _LI, "outsourcing the operation of email servers and protocols"
            ),
        ),
        SharingEntry(data_type="email address", **_ACCOUNTING),
        SharingEntry(
            recipient="FraudDetectors",
            role=Role.PROCESSOR,
            data_type="email address",
            purpose_of_sharing="fraud detection",
            legal_basis=LegalBasis(_LI, "not becoming a victim of fraud"),
        ),
    ]


def email_paragraph_policy() -> PolicyDocument:
    """Just the email-address paragraph: the canonical single-category fixture."""
    return build_policy("Orderoo Inc.", [_email_category()], _email_sharing())


def sample_policy() -> PolicyDocument:
    """The full desk-scale Orderoo Inc. mock policy."""
    categories = [
        _email_category(),
        DataCategory(
            category_id="2",
            data_type="name and surname",
            source="You provide us with your name and surname when registering for the service",
            entries=(
                ProcessingEntry(
                    "order labeling",
                    "to put your name on the orders we hand to couriers",
                    LegalBasis(_CN),
                    _ACCOUNT_LIFETIME,
                ),
                ProcessingEntry(
                    "invoicing",
                    "to issue invoices for your orders when you request one",
                    LegalBasis(_LO, "to issue invoices, according to the Accounting Act"),
                    StorageRule(
                        StorageKind.DURATION,
                        "five years after your last transaction",
                        scope_note="the Accounting Act",
                    ),
                ),
            ),
        ),
        DataCategory(
            category_id="3",
            data_type="geolocation",
            source="Collected from your device while you use the app",
            entries=(
                ProcessingEntry(
                    "order delivery",
                    "to guide the courier to your address",
                    LegalBasis(_CN),
                    StorageRule(
                        StorageKind.CRITERIA,
                        "the delivery is in progress, i.e., until your order is completed",
                    ),
                ),
                ProcessingEntry(
                    "background location analytics",
                    "to analyze neighborhood demand for restaurants while the app is closed",
                    LegalBasis(_CO, "you opted in to background collection in the app settings"),
                    StorageRule(StorageKind.DURATION, "one year after collection"),
                ),
            ),
        ),
        DataCategory(
            category_id="4",
            data_type="order history",
            source="Recorded when you place orders on our platform",
            entries=(
                ProcessingEntry(
                    "reordering convenience",
                    "to let you repeat a previous order with one tap",
                    LegalBasis(_CN),
                    _ACCOUNT_LIFETIME,
                ),
                ProcessingEntry(
                    "meal recommendations",
                    "to suggest dishes similar to those you have ordered before",
                    LegalBasis(_CO, "you opted in to recommendations in the app settings"),
                    _ACCOUNT_LIFETIME,
                ),
                ProcessingEntry(
                    "fraud screening",
                    "to detect unusual ordering patterns",
                    LegalBasis(_LI, "not becoming a victim of fraud"),
                    StorageRule(StorageKind.DURATION, "two years after the order"),
                ),
            ),
        ),
        DataCategory(
            category_id="5",
            data_type="payment card number",
            source="Entered when you pay for an order in the app",
            entries=(
                ProcessingEntry(
                    "payment processing",
                    "to charge you for your orders",
                    LegalBasis(_CN),
                    StorageRule(
                        StorageKind.CRITERIA,
                        "needed to complete the payment, i.e., until the transaction settles",
                    ),
                ),
            ),
        ),
    ]
    sharing = _email_sharing() + [
        SharingEntry(data_type="name and surname", **_CLOUD_BACKUP),
        SharingEntry(data_type="name and surname", **_ACCOUNTING),
        SharingEntry(
            recipient="RouteWizards",
            role=Role.PROCESSOR,
            data_type="geolocation",
            purpose_of_sharing="route optimization",
            purpose_explanation="computing the fastest delivery routes",
            legal_basis=LegalBasis(_CN),
        ),
        SharingEntry(
            recipient="Facebook",
            role=Role.CONTROLLER,
            data_type="geolocation",
            purpose_of_sharing="targeted advertising",
            purpose_explanation="building advertising audiences from the places you order from",
            legal_basis=LegalBasis(_CO, "you enabled the social media integration"),
        ),
        SharingEntry(data_type="order history", **_CLOUD_BACKUP),
        SharingEntry(
            recipient="Facebook",
            role=Role.CONTROLLER,
            data_type="order history",
            purpose_of_sharing="promoting popular dishes",
            purpose_explanation="sharing order trends with the social network for advertising",
            legal_basis=LegalBasis(_CO, "you enabled the social media integration"),
        ),
        SharingEntry(
            recipient="PayGate",
            role=Role.PROCESSOR,
            data_type="payment card number",
            purpose_of_sharing="payment execution",
            purpose_explanation="charging your card on our behalf",
            legal_basis=LegalBasis(_CN),
        ),
        SharingEntry(data_type="payment card number", **_CLOUD_BACKUP),
    ]
    return build_policy("Orderoo Inc.", categories, sharing)


# --- benchmark outcome grids ---------------------------------------------------

FIXTURE_QUESTIONS = (
    "q1",
    "q2:email address",
    "q3:geolocation",
    "q4:consent",
    "q5:Facebook",
    "q6:insurers",
)

# Ten labels per question: sessions 1 and 2, runs 1-5 each.
# ok = correct, fn = false negative, fp = false positive;
# a trailing * means the answer changed after the redo prompt.
_ALL_OK = ("ok",) * 10
_GPT35 = {
    "q1": _ALL_OK,
    "q2:email address": _ALL_OK,
    "q3:geolocation": _ALL_OK,
    "q4:consent": ("fn",) * 10,
    "q5:Facebook": ("fn",) * 10,
    "q6:insurers": _ALL_OK,
}

SETTING_LABEL_GRIDS: dict[str, dict[str, tuple[str, ...]]] = {
    "GPT-3.5 (S)": _GPT35,
    "GPT-3.5 (L)": _GPT35,
    "GPT-4 (S)": {
        "q1": _ALL_OK,
        "q2:email address": _ALL_OK,
        "q3:geolocation": ("ok", "ok", "ok", "ok", "ok", "fp", "ok", "ok*", "fp*", "ok"),
        "q4:consent": ("fn", "fn", "fn", "fn", "fn", "ok", "ok", "fn", "ok", "ok"),
        "q5:Facebook": _ALL_OK,
        "q6:insurers": _ALL_OK,
    },
    "GPT-4 (L)": {
        "q1": _ALL_OK,
        "q2:email address": _ALL_OK,
        "q3:geolocation": ("ok", "ok", "ok", "ok", "ok", "ok", "fp", "fp", "fp", "ok"),
        "q4:consent": ("fn", "fn", "fn", "fn", "fn", "fn", "fn", "fn", "ok", "ok"),
        "q5:Facebook": _ALL_OK,
        "q6:insurers": _ALL_OK,
    },
}

_LABEL_VERDICTS = {
    "ok": Verdict.CORRECT,
    "fn": Verdict.FALSE_NEGATIVE,
    "fp": Verdict.FALSE_POSITIVE,
    "ok*": Verdict.FALSE_POSITIVE,  # first answer; the redo fixed it
    "fp*": Verdict.FALSE_POSITIVE,
}


def _config_for(setting: str) -> ExperimentConfig:
    model, _, style = setting.rpartition(" ")
    return ExperimentConfig(
        model_id=model,
        prompt_style="short" if style == "(S)" else "long",
        sessions=2,
        runs_per_session=5,
        questions=FIXTURE_QUESTIONS,
    )


def synthesize_conversation(label: str, key: AnswerKey) -> tuple[str, str | None]:
    """First answer and optional redo answer realizing one outcome label."""
    correct = render_key_enumeration(key)
    if key.display:
        dropped = ", ".join(key.display[:-1]) + "."
    else:
        dropped = "Nothing."
    wrong_extra = (correct[:-1] + ", Cloud711.") if correct != "Nothing." else "Cloud711."

    if label == "ok":
        return correct, None
    if label == "fn":
        return dropped, dropped
    if label == "fp":
        return wrong_extra, wrong_extra
    if label == "ok*":
        return wrong_extra, correct
    if label == "fp*":
        return wrong_extra, "Looking again: " + wrong_extra
    raise ValueError(f"unknown outcome label {label!r}")


def _fixed_clock() -> str:
    return "2023-09-30T00:00:00+00:00"


def fixture_run_records(
    policy: PolicyDocument | None = None,
    settings: tuple[str, ...] | None = None,
) -> list[RunRecord]:
    """Graded run records reproducing the benchmark outcome grids.

    Answers are synthesized and pushed through the real grader; a
    mismatch between the grader's verdict and the grid label fails
    loudly, so the fixture cannot silently drift.
    """
    from .textformat import render_text

    policy = policy if policy is not None else sample_policy()
    policy_text = render_text(policy)
    vocab = build_vocabulary(policy)
    keys = {q: answer(policy, parse_question(q)) for q in FIXTURE_QUESTIONS}

    records: list[RunRecord] = []
    for setting in settings or tuple(SETTING_LABEL_GRIDS):
        grid = SETTING_LABEL_GRIDS[setting]
        config = _config_for(setting)
        for question in FIXTURE_QUESTIONS:
            prompt = compose_prompt(parse_question(question), config.prompt_style)
            for slot, label in enumerate(grid[question]):
                session_id, run_index = divmod(slot, 5)
                first, redo = synthesize_conversation(label, keys[question])
                record = _build_record(
                    setting, session_id + 1, run_index + 1, question,
                    policy_text, prompt, first, redo, keys[question], vocab,
                )
                expected = _LABEL_VERDICTS[label]
                got = record.grade.verdict if record.grade else None
                if got is not expected:
                    raise RuntimeError(
                        f"fixture drift: {setting}/{question} label {label!r} graded {got}"
                    )
                records.append(record)
    return records


def _build_record(
    setting: str,
    session_id: int,
    run_index: int,
    question: str,
    policy_text: str,
    prompt: str,
    first_answer: str,
    redo_answer: str | None,
    key: AnswerKey,
    vocab: EntityVocabulary,
) -> RunRecord:
    ts = _fixed_clock()
    transcript = [
        Message("user", OPENER, ts),
        Message("assistant", "Sure, go ahead.", ts),
        Message("user", policy_text, ts),
        Message("assistant", "Got it. What would you like to know?", ts),
        Message("user", prompt, ts),
        Message("assistant", first_answer, ts),
    ]
    first_grade = grade(first_answer, key, vocab)
    retry = None
    if redo_answer is not None:
        transcript.append(Message("user", "Are you sure? Please try again", ts))
        transcript.append(Message("assistant", redo_answer, ts))
        retry = RetryOutcome(
            "Are you sure? Please try again", redo_answer, grade(redo_answer, key, vocab)
        )
    return RunRecord(
        setting=setting,
        session_id=session_id,
        run_index=run_index,
        question=question,
        transcript=tuple(transcript),
        grade=first_grade,
        retry=retry,
    )


def write_fixture_transcripts(
    directory: str | Path, setting: str = "GPT-4 (S)"
) -> ExperimentConfig:
    """Write an offline replay directory realizing one setting's grid;
    returns the experiment config that replays it."""
    policy = sample_policy()
    keys = {q: answer(policy, parse_question(q)) for q in FIXTURE_QUESTIONS}
    grid = SETTING_LABEL_GRIDS[setting]
    config = _config_for(setting)
    for question in FIXTURE_QUESTIONS:
        for slot, label in enumerate(grid[question]):
            session_id, run_index = divmod(slot, 5)
            first, redo = synthesize_conversation(label, keys[question])
            write_offline_transcript(
                directory,
                config.setting_label,
                session_id + 1,
                run_index + 1,
                question,
                first,
                retry_answer=redo,
            )
    return config
