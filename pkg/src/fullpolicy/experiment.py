"""Chat experiment harness: opener, policy paste, question, optional redo.

Each (session, run, question) triple is one conversation: the fixed
opener, the full policy text, the composed question prompt, and, when
the graded answer is not correct and retries are enabled, one "are you
sure" follow-up.  Sessions share no conversational state.

Two transports implement the answer source: a live chat-completion
client (JSON over HTTP, OpenAI-style message lists) and an offline
replay reading canned answers from a transcript directory, which is
what the test suite and any reproduction run use.  Records are
persisted one JSON line per run record, one file per setting, each
record appended before the next run begins.
"""

from __future__ import annotations

import json
import os
import re
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable

from .errors import ConfigError, PolicyTooLong, QuestionError, TransportFailure
from .grading import DEFAULT_NEGATION_CUES, Grade, Verdict, build_vocabulary, grade
from .oracle import AnswerKey, QuestionSpec, QuestionTemplate, answer, parse_question
from .textformat import parse_text

OPENER = (
    "Hi, I will copy-paste a document here and then ask you some questions "
    "about its contents, is that ok?"
)

RETRY_PROMPT = "Are you sure? Please try again"

LONG_INSTRUCTIONS = (
    "In answering the question please rely solely on the information included "
    "in the text and not your knowledge from other sources; please read the "
    "document carefully and mention everything, do not omit any information "
    "included in the text; please do not shorten or simplify the answers by "
    'inserting elements like "for example", "including" or "such as", please '
    "limit your answer strictly to what I am asking about and refrain from "
    "giving me advice or informing me about things I have not asked about."
)

DEFAULT_QUESTIONS = (
    "q1",
    "q2:email address",
    "q3:geolocation",
    "q4:consent",
    "q5:Facebook",
    "q6:insurers",
)

_QUESTION_SENTENCES = {
    QuestionTemplate.LIST_DATA_TYPES: "What data does {company} process about me?",
    QuestionTemplate.PURPOSES_OF: "For what purposes does {company} use my {parameter}?",
    QuestionTemplate.RECIPIENTS_OF: "Who does {company} share my {parameter} with?",
    QuestionTemplate.DATA_BY_BASIS: (
        "What types of data are processed on the basis of {parameter}, and for what purposes?"
    ),
    QuestionTemplate.DATA_SHARED_WITH: "What data does {company} share with {parameter}?",
    QuestionTemplate.SHARES_WITH_BOOL: "Does {company} share my data with {parameter}?",
}


def compose_prompt(question: QuestionSpec, style: str, company: str = "Orderoo") -> str:
    """Natural-language prompt for a question; the long style appends
    the anti-hallucination instruction block."""
    sentence = _QUESTION_SENTENCES[question.template].format(
        company=company, parameter=question.parameter
    )
    if style == "long":
        return f"{sentence} {LONG_INSTRUCTIONS}"
    return sentence


@dataclass(frozen=True)
class ExperimentConfig:
    model_id: str
    prompt_style: str = "short"
    sessions: int = 2
    runs_per_session: int = 5
    questions: tuple[str, ...] = DEFAULT_QUESTIONS
    company: str = "Orderoo"
    policy_file: str | None = None
    alias_file: str | None = None
    endpoint: str | None = None
    api_key_env: str = "CHAT_API_KEY"
    retry_on_incorrect: bool = True
    context_budget: int = 3900
    token_factor: float = 1.3

    def __post_init__(self) -> None:
        if self.prompt_style not in ("short", "long"):
            raise ConfigError(f"prompt_style must be short or long, got {self.prompt_style!r}")
        if self.runs_per_session < 1 or self.sessions < 1:
            raise ConfigError("sessions and runs_per_session must be at least 1")
        if not self.questions:
            raise ConfigError("question list is empty")
        for q in self.questions:
            try:
                parse_question(q)
            except QuestionError as exc:
                raise ConfigError(f"bad question {q!r}: {exc}") from exc

    @property
    def setting_label(self) -> str:
        return f"{self.model_id} ({'S' if self.prompt_style == 'short' else 'L'})"


def load_config(text: str) -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    known = {f.name for f in ExperimentConfig.__dataclass_fields__.values()}  # type: ignore[attr-defined]
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if "questions" in data:
        data["questions"] = tuple(data["questions"])
    try:
        return ExperimentConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class Message:
    role: str
    content: str
    timestamp: str


@dataclass(frozen=True)
class RetryOutcome:
    prompt: str
    answer: str
    regrade: Grade


@dataclass(frozen=True)
class RunRecord:
    setting: str
    session_id: int
    run_index: int
    question: str
    transcript: tuple[Message, ...]
    grade: Grade | None
    retry: RetryOutcome | None = None
    error: str | None = None

    def first_verdict_correct(self) -> bool:
        return self.grade is not None and self.grade.verdict is Verdict.CORRECT

    def final_verdict_correct(self) -> bool:
        final = self.retry.regrade if self.retry is not None else self.grade
        return final is not None and final.verdict is Verdict.CORRECT

    def to_dict(self) -> dict:
        return {
            "setting": self.setting,
            "session_id": self.session_id,
            "run_index": self.run_index,
            "question": self.question,
            "transcript": [
                {"role": m.role, "content": m.content, "timestamp": m.timestamp}
                for m in self.transcript
            ],
            "grade": self.grade.to_dict() if self.grade is not None else None,
            "retry": (
                {
                    "prompt": self.retry.prompt,
                    "answer": self.retry.answer,
                    "regrade": self.retry.regrade.to_dict(),
                }
                if self.retry is not None
                else None
            ),
            "error": self.error,
        }

    def to_json_line(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_dict(cls, data: dict) -> "RunRecord":
        retry = None
        if data.get("retry") is not None:
            retry = RetryOutcome(
                prompt=data["retry"]["prompt"],
                answer=data["retry"]["answer"],
                regrade=Grade.from_dict(data["retry"]["regrade"]),
            )
        return cls(
            setting=data["setting"],
            session_id=int(data["session_id"]),
            run_index=int(data["run_index"]),
            question=data["question"],
            transcript=tuple(
                Message(m["role"], m["content"], m["timestamp"]) for m in data["transcript"]
            ),
            grade=Grade.from_dict(data["grade"]) if data.get("grade") is not None else None,
            retry=retry,
            error=data.get("error"),
        )


def slugify(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "-", text).strip("-").lower()


def transcript_filename(setting: str, session_id: int, run_index: int, question: str) -> str:
    return (
        f"{slugify(setting)}__session{session_id}__run{run_index}__{slugify(question)}.json"
    )


class OfflineTransport:
    """Replays canned conversations from a transcript directory."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)

    def start(self, setting: str, session_id: int, run_index: int, question: str):
        path = self.directory / transcript_filename(setting, session_id, run_index, question)
        if not path.exists():
            raise TransportFailure(f"no offline transcript at {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise TransportFailure(f"unreadable transcript {path}: {exc}") from exc
        if "answer" not in data:
            raise TransportFailure(f"transcript {path} lacks an 'answer' field")
        replies = [
            data.get("opener_ack", "Sure, go ahead."),
            data.get("policy_ack", "Got it. What would you like to know?"),
            data["answer"],
        ]
        if data.get("retry_answer") is not None:
            replies.append(data["retry_answer"])
        return _OfflineConversation(replies, str(path))


class _OfflineConversation:
    def __init__(self, replies: list[str], origin: str):
        self._replies = list(replies)
        self._origin = origin

    def send(self, content: str) -> str:
        if not self._replies:
            raise TransportFailure(f"offline transcript {self._origin} exhausted")
        return self._replies.pop(0)


def write_offline_transcript(
    directory: str | Path,
    setting: str,
    session_id: int,
    run_index: int,
    question: str,
    answer_text: str,
    retry_answer: str | None = None,
) -> Path:
    """Helper for building replay directories (tests, reproductions)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / transcript_filename(setting, session_id, run_index, question)
    payload: dict = {"answer": answer_text}
    if retry_answer is not None:
        payload["retry_answer"] = retry_answer
    path.write_text(json.dumps(payload, sort_keys=True, ensure_ascii=False) + "\n", "utf-8")
    return path


class LiveTransport:
    """Minimal chat-completion wire client (OpenAI-style JSON shape).

    Endpoint, model and credential come from the experiment config and
    the environment; nothing in the test suite exercises the network.
    """

    def __init__(self, endpoint: str, model_id: str, api_key_env: str, timeout: float = 120.0):
        self.endpoint = endpoint
        self.model_id = model_id
        self.api_key_env = api_key_env
        self.timeout = timeout

    def start(self, setting: str, session_id: int, run_index: int, question: str):
        key = os.environ.get(self.api_key_env)
        if not key:
            raise TransportFailure(f"environment variable {self.api_key_env} is not set")
        return _LiveConversation(self, key)


class _LiveConversation:
    def __init__(self, transport: LiveTransport, api_key: str):
        self._transport = transport
        self._api_key = api_key
        self._messages: list[dict] = []

    def send(self, content: str) -> str:
        self._messages.append({"role": "user", "content": content})
        body = json.dumps(
            {"model": self._transport.model_id, "messages": self._messages}
        ).encode("utf-8")
        request = urllib.request.Request(
            self._transport.endpoint,
            data=body,
            headers={
                "Content-Type": "application/json",
                "Authorization": f"Bearer {self._api_key}",
            },
        )
        try:
            with urllib.request.urlopen(request, timeout=self._transport.timeout) as response:
                payload = json.loads(response.read().decode("utf-8"))
            reply = payload["choices"][0]["message"]["content"]
        except (urllib.error.URLError, KeyError, IndexError, ValueError) as exc:
            raise TransportFailure(f"chat-completion call failed: {exc}") from exc
        self._messages.append({"role": "assistant", "content": reply})
        return reply


class RecordWriter:
    """Appends records to one JSONL file per setting, flushing each
    record before the next run starts."""

    def __init__(self, out_dir: str | Path):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def append(self, record: RunRecord) -> Path:
        path = self.out_dir / f"{slugify(record.setting)}.jsonl"
        with path.open("a", encoding="utf-8") as handle:
            handle.write(record.to_json_line() + "\n")
        return path


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def estimate_tokens(policy_text: str, token_factor: float) -> int:
    return int(len(policy_text.split()) * token_factor)


def run_experiment(
    config: ExperimentConfig,
    policy_text: str,
    transport,
    out_dir: str | Path | None = None,
    alias_text: str | None = None,
    clock: Callable[[], str] | None = None,
) -> list[RunRecord]:
    """Run the full session x run x question grid and grade every answer.

    Transport failures mark the affected run incomplete and the
    experiment continues.  The size pre-flight happens before the
    transport is touched at all.
    """
    if estimate_tokens(policy_text, config.token_factor) > config.context_budget:
        raise PolicyTooLong(
            f"policy estimate {estimate_tokens(policy_text, config.token_factor)} tokens "
            f"exceeds budget {config.context_budget}"
        )

    policy = parse_text(policy_text)
    vocab = build_vocabulary(policy, alias_text)
    keys: dict[str, AnswerKey] = {
        q: answer(policy, parse_question(q), vocab.alias_table) for q in config.questions
    }

    now = clock if clock is not None else _utc_now
    writer = RecordWriter(out_dir) if out_dir is not None else None
    records: list[RunRecord] = []

    for session_id in range(1, config.sessions + 1):
        for run_index in range(1, config.runs_per_session + 1):
            for question in config.questions:
                record = _run_one(
                    config, policy_text, transport, keys[question], vocab,
                    session_id, run_index, question, now,
                )
                records.append(record)
                if writer is not None:
                    writer.append(record)
    return records


def _run_one(
    config: ExperimentConfig,
    policy_text: str,
    transport,
    key: AnswerKey,
    vocab,
    session_id: int,
    run_index: int,
    question: str,
    now: Callable[[], str],
) -> RunRecord:
    label = config.setting_label
    transcript: list[Message] = []

    def base_record(g: Grade | None, retry: RetryOutcome | None, error: str | None) -> RunRecord:
        return RunRecord(
            setting=label,
            session_id=session_id,
            run_index=run_index,
            question=question,
            transcript=tuple(transcript),
            grade=g,
            retry=retry,
            error=error,
        )

    try:
        conversation = transport.start(label, session_id, run_index, question)
    except TransportFailure as exc:
        return base_record(None, None, str(exc))

    def exchange(content: str) -> str:
        transcript.append(Message("user", content, now()))
        reply = conversation.send(content)
        transcript.append(Message("assistant", reply, now()))
        return reply

    try:
        exchange(OPENER)
        exchange(policy_text)
        prompt = compose_prompt(parse_question(question), config.prompt_style, config.company)
        answer_text = exchange(prompt)
    except TransportFailure as exc:
        return base_record(None, None, str(exc))

    first_grade = grade(answer_text, key, vocab, DEFAULT_NEGATION_CUES)
    retry: RetryOutcome | None = None
    error: str | None = None
    if first_grade.verdict is not Verdict.CORRECT and config.retry_on_incorrect:
        try:
            retry_answer = exchange(RETRY_PROMPT)
            retry = RetryOutcome(RETRY_PROMPT, retry_answer, grade(retry_answer, key, vocab))
        except TransportFailure as exc:
            error = f"retry failed: {exc}"
    return base_record(first_grade, retry, error)


def read_records(paths: Iterable[str | Path]) -> list[RunRecord]:
    """Load run records from JSONL files and/or directories of them."""
    records: list[RunRecord] = []
    for raw in paths:
        path = Path(raw)
        files = sorted(path.glob("*.jsonl")) if path.is_dir() else [path]
        for file in files:
            for line in file.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    records.append(RunRecord.from_dict(json.loads(line)))
    return records
