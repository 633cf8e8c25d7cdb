from __future__ import annotations

import io
import json
import urllib.request

import pytest

from fullpolicy.errors import ConfigError, PolicyTooLong, TransportFailure
from fullpolicy.experiment import (
    DEFAULT_QUESTIONS,
    ExperimentConfig,
    LiveTransport,
    LONG_INSTRUCTIONS,
    OfflineTransport,
    OPENER,
    RunRecord,
    compose_prompt,
    load_config,
    read_records,
    run_experiment,
    transcript_filename,
    write_offline_transcript,
)
from fullpolicy.fixtures import sample_policy
from fullpolicy.grading import Verdict
from fullpolicy.oracle import answer, parse_question
from fullpolicy.grading import render_key_enumeration
from fullpolicy.textformat import render_text


def _fixed_clock():
    return "2023-09-30T12:00:00+00:00"


def make_config(**overrides):
    values = dict(
        model_id="GPT-4",
        prompt_style="short",
        sessions=2,
        runs_per_session=5,
        questions=DEFAULT_QUESTIONS,
    )
    values.update(overrides)
    return ExperimentConfig(**values)


def write_all_correct_transcripts(directory, config):
    policy = sample_policy()
    for question in config.questions:
        key = answer(policy, parse_question(question))
        for session in range(1, config.sessions + 1):
            for run in range(1, config.runs_per_session + 1):
                write_offline_transcript(
                    directory,
                    config.setting_label,
                    session,
                    run,
                    question,
                    render_key_enumeration(key),
                )
    return render_text(policy)


def test_compose_prompt_surface_forms():
    assert (
        compose_prompt(parse_question("q1"), "short")
        == "What data does Orderoo process about me?"
    )
    assert (
        compose_prompt(parse_question("q6:insurers"), "short")
        == "Does Orderoo share my data with insurers?"
    )
    long = compose_prompt(parse_question("q1"), "long")
    assert long.startswith("What data does Orderoo process about me? In answering the question")
    assert long.endswith(LONG_INSTRUCTIONS)
    assert 'please rely solely on the information included in the text' in long
    assert '"for example", "including" or "such as"' in long


def test_compose_prompt_other_templates():
    assert (
        compose_prompt(parse_question("q2:email address"), "short")
        == "For what purposes does Orderoo use my email address?"
    )
    assert (
        compose_prompt(parse_question("q3:geolocation"), "short")
        == "Who does Orderoo share my geolocation with?"
    )
    assert (
        compose_prompt(parse_question("q4:consent"), "short")
        == "What types of data are processed on the basis of consent, and for what purposes?"
    )
    assert (
        compose_prompt(parse_question("q5:Facebook"), "short")
        == "What data does Orderoo share with Facebook?"
    )


def test_all_correct_offline_run_has_no_retries(tmp_path):
    config = make_config(sessions=1, runs_per_session=2)
    policy_text = write_all_correct_transcripts(tmp_path, config)
    records = run_experiment(
        config, policy_text, OfflineTransport(tmp_path), clock=_fixed_clock
    )
    assert len(records) == 1 * 2 * 6
    assert all(r.grade is not None and r.grade.verdict is Verdict.CORRECT for r in records)
    assert all(r.retry is None for r in records)
    assert all(r.transcript[0].content == OPENER for r in records)


def test_grid_size_is_sessions_times_runs_times_questions(tmp_path):
    config = make_config()
    policy_text = write_all_correct_transcripts(tmp_path, config)
    records = run_experiment(config, policy_text, OfflineTransport(tmp_path))
    assert len(records) == 2 * 5 * 6


def test_false_positive_answer_triggers_retry_and_regrade(tmp_path):
    policy = sample_policy()
    config = make_config(sessions=1, runs_per_session=1, questions=("q3:geolocation",))
    key = answer(policy, parse_question("q3:geolocation"))
    wrong = render_key_enumeration(key)[:-1] + ", Cloud711."
    write_offline_transcript(
        tmp_path, config.setting_label, 1, 1, "q3:geolocation", wrong,
        retry_answer=render_key_enumeration(key),
    )
    records = run_experiment(config, render_text(policy), OfflineTransport(tmp_path))
    (record,) = records
    assert record.grade.verdict is Verdict.FALSE_POSITIVE
    assert record.retry is not None
    assert record.retry.prompt == "Are you sure? Please try again"
    assert record.retry.regrade.verdict is Verdict.CORRECT
    assert record.first_verdict_correct() is False
    assert record.final_verdict_correct() is True


def test_retry_disabled_by_config(tmp_path):
    policy = sample_policy()
    config = make_config(
        sessions=1, runs_per_session=1, questions=("q3:geolocation",), retry_on_incorrect=False
    )
    key = answer(policy, parse_question("q3:geolocation"))
    wrong = render_key_enumeration(key)[:-1] + ", Cloud711."
    write_offline_transcript(
        tmp_path, config.setting_label, 1, 1, "q3:geolocation", wrong
    )
    records = run_experiment(config, render_text(policy), OfflineTransport(tmp_path))
    assert records[0].retry is None


class _ExplodingTransport:
    touched = False

    def start(self, *args):
        self.touched = True
        raise AssertionError("transport must not be touched")


def test_policy_too_long_fires_before_any_transport_call():
    config = make_config(context_budget=10, token_factor=1.0)
    transport = _ExplodingTransport()
    with pytest.raises(PolicyTooLong):
        run_experiment(config, "word " * 50, transport)
    assert transport.touched is False


def test_transport_failure_marks_run_incomplete_and_continues(tmp_path):
    policy = sample_policy()
    config = make_config(sessions=1, runs_per_session=1, questions=("q1", "q6:insurers"))
    # only the second question has a transcript
    key = answer(policy, parse_question("q6:insurers"))
    write_offline_transcript(
        tmp_path, config.setting_label, 1, 1, "q6:insurers", render_key_enumeration(key)
    )
    records = run_experiment(config, render_text(policy), OfflineTransport(tmp_path))
    assert len(records) == 2
    assert records[0].grade is None and records[0].error is not None
    assert records[1].grade.verdict is Verdict.CORRECT


def test_records_persisted_one_line_each_before_next_run(tmp_path):
    config = make_config(sessions=1, runs_per_session=2, questions=("q1",))
    policy_text = write_all_correct_transcripts(tmp_path / "transcripts", config)
    out_dir = tmp_path / "records"
    records = run_experiment(
        config, policy_text, OfflineTransport(tmp_path / "transcripts"), out_dir=out_dir
    )
    files = list(out_dir.glob("*.jsonl"))
    assert len(files) == 1
    lines = files[0].read_text(encoding="utf-8").splitlines()
    assert len(lines) == len(records) == 2
    loaded = read_records([out_dir])
    assert loaded == records


def test_offline_replay_is_deterministic(tmp_path):
    config = make_config(sessions=1, runs_per_session=2)
    policy_text = write_all_correct_transcripts(tmp_path, config)
    first = run_experiment(config, policy_text, OfflineTransport(tmp_path), clock=_fixed_clock)
    second = run_experiment(config, policy_text, OfflineTransport(tmp_path), clock=_fixed_clock)
    assert [r.to_json_line() for r in first] == [r.to_json_line() for r in second]


def test_missing_transcript_is_transport_failure(tmp_path):
    transport = OfflineTransport(tmp_path)
    with pytest.raises(TransportFailure):
        transport.start("GPT-4 (S)", 1, 1, "q1")


def test_transcript_filenames_are_filesystem_safe():
    name = transcript_filename("GPT-3.5 (S)", 1, 2, "q2:email address")
    assert name == "gpt-3.5-s__session1__run2__q2-email-address.json"


def test_config_loading_and_validation():
    config = load_config(json.dumps({"model_id": "GPT-4", "prompt_style": "long"}))
    assert config.setting_label == "GPT-4 (L)"
    with pytest.raises(ConfigError):
        load_config("not json")
    with pytest.raises(ConfigError):
        load_config(json.dumps({"model_id": "x", "prompt_style": "medium"}))
    with pytest.raises(ConfigError):
        load_config(json.dumps({"model_id": "x", "bogus_key": 1}))
    with pytest.raises(ConfigError):
        load_config(json.dumps({"model_id": "x", "sessions": 0}))
    with pytest.raises(ConfigError):
        load_config(json.dumps({"model_id": "x", "questions": ["q7:nope"]}))


def test_live_transport_wire_shape(monkeypatch, tmp_path):
    calls = []

    class FakeResponse(io.BytesIO):
        def __enter__(self):
            return self

        def __exit__(self, *args):
            return False

    def fake_urlopen(request, timeout=None):
        calls.append(json.loads(request.data.decode("utf-8")))
        reply = {"choices": [{"message": {"content": f"reply {len(calls)}"}}]}
        return FakeResponse(json.dumps(reply).encode("utf-8"))

    monkeypatch.setattr(urllib.request, "urlopen", fake_urlopen)
    monkeypatch.setenv("CHAT_API_KEY", "test-key")
    transport = LiveTransport("https://example.test/v1/chat", "gpt-4", "CHAT_API_KEY")
    conversation = transport.start("GPT-4 (S)", 1, 1, "q1")
    assert conversation.send("hello") == "reply 1"
    assert conversation.send("again") == "reply 2"
    assert calls[1]["messages"] == [
        {"role": "user", "content": "hello"},
        {"role": "assistant", "content": "reply 1"},
        {"role": "user", "content": "again"},
    ]
    assert calls[0]["model"] == "gpt-4"


def test_live_transport_requires_credential(monkeypatch):
    monkeypatch.delenv("CHAT_API_KEY", raising=False)
    transport = LiveTransport("https://example.test/v1/chat", "gpt-4", "CHAT_API_KEY")
    with pytest.raises(TransportFailure):
        transport.start("GPT-4 (S)", 1, 1, "q1")


def test_run_record_serialization_round_trip(tmp_path):
    config = make_config(sessions=1, runs_per_session=1, questions=("q1",))
    policy_text = write_all_correct_transcripts(tmp_path, config)
    (record,) = run_experiment(config, policy_text, OfflineTransport(tmp_path))
    assert RunRecord.from_dict(json.loads(record.to_json_line())) == record
