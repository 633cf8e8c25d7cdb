from __future__ import annotations

import json

import pytest

from fullpolicy.cli import main
from fullpolicy.experiment import RecordWriter
from fullpolicy.fixtures import (
    email_paragraph_policy,
    fixture_run_records,
    sample_policy,
    write_fixture_transcripts,
)
from fullpolicy.tabular import render_tabular
from fullpolicy.textformat import parse_text, render_text


@pytest.fixture()
def policy_file(tmp_path):
    path = tmp_path / "orderoo.txt"
    path.write_text(render_text(sample_policy()), encoding="utf-8")
    return path


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_query_boolean_negative(policy_file, capsys):
    code, out, _ = run_cli(capsys, "query", "q6:insurers", "--policy", str(policy_file))
    assert code == 0
    assert out == "no\n"


def test_query_boolean_positive_lists_evidence(policy_file, capsys):
    code, out, _ = run_cli(capsys, "query", "q6:Facebook", "--policy", str(policy_file))
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "yes"
    assert len(lines) == 3 and all("Facebook" in line for line in lines[1:])


def test_query_entity_set_in_document_order(policy_file, capsys):
    code, out, _ = run_cli(capsys, "query", "q2:email address", "--policy", str(policy_file))
    assert code == 0
    assert out.splitlines()[0] == "unique identifier"
    assert len(out.splitlines()) == 7


def test_query_unknown_data_type_is_data_error(policy_file, capsys):
    code, _, err = run_cli(capsys, "query", "q2:shoe size", "--policy", str(policy_file))
    assert code == 1
    assert "shoe size" in err


def test_validate_clean_policy_exits_zero(policy_file, capsys):
    code, out, _ = run_cli(capsys, "validate", "--policy", str(policy_file))
    assert code == 0
    assert "0 error(s)" in out


def test_validate_missing_storage_reports_e2_and_exits_one(tmp_path, capsys):
    text = render_text(sample_policy())
    # strip the storage sentences from the payment paragraph
    mutated = text.replace(
        " We store your payment card number for as long as needed to complete the "
        "payment, i.e., until the transaction settles.",
        "",
    )
    assert mutated != text
    path = tmp_path / "draft.txt"
    path.write_text(mutated, encoding="utf-8")
    code, out, _ = run_cli(capsys, "validate", "--policy", str(path))
    assert code == 1
    assert "E2" in out


def test_validate_vague_phrase_warning(tmp_path, capsys):
    text = render_text(sample_policy()).replace(
        "to charge you for your orders", "so we can improve our service"
    )
    path = tmp_path / "vague.txt"
    path.write_text(text, encoding="utf-8")
    code, out, _ = run_cli(capsys, "validate", "--policy", str(path))
    assert code == 0  # warnings alone do not fail
    assert "W-VAGUE" in out


def test_parse_echoes_canonical_text(policy_file, capsys):
    code, out, _ = run_cli(capsys, "parse", "--policy", str(policy_file))
    assert code == 0
    assert out == render_text(sample_policy())


def test_render_text_to_tabular_and_back(policy_file, tmp_path, capsys):
    base = tmp_path / "orderoo"
    code, out, _ = run_cli(
        capsys, "render", "--policy", str(policy_file), "--to", "tabular", "--out", str(base)
    )
    assert code == 0
    proc, shar = render_tabular(sample_policy())
    assert (tmp_path / "orderoo.processing.csv").read_text(encoding="utf-8") == proc
    assert (tmp_path / "orderoo.sharing.csv").read_text(encoding="utf-8") == shar

    code, out, _ = run_cli(
        capsys,
        "render",
        "--policy", str(base),
        "--format", "tabular",
        "--company", "Orderoo Inc.",
        "--to", "text",
    )
    assert code == 0
    assert parse_text(out) == sample_policy()


def test_grade_command_reports_false_positive(policy_file, tmp_path, capsys):
    answer_file = tmp_path / "answer.txt"
    answer_file.write_text(
        "Orderoo shares your geolocation with RouteWizards, Facebook and Cloud711.",
        encoding="utf-8",
    )
    code, out, _ = run_cli(
        capsys,
        "grade", "q3:geolocation",
        "--policy", str(policy_file),
        "--answer-file", str(answer_file),
    )
    assert code == 0
    assert "verdict: false_positive" in out
    assert "extra_in_document: cloud711" in out


def test_run_offline_and_report(policy_file, tmp_path, capsys):
    transcripts = tmp_path / "transcripts"
    config = write_fixture_transcripts(transcripts, "GPT-4 (S)")
    config_path = tmp_path / "config.json"
    config_path.write_text(
        json.dumps(
            {
                "model_id": config.model_id,
                "prompt_style": config.prompt_style,
                "sessions": config.sessions,
                "runs_per_session": config.runs_per_session,
                "questions": list(config.questions),
            }
        ),
        encoding="utf-8",
    )
    out_dir = tmp_path / "records"
    code, out, _ = run_cli(
        capsys,
        "run",
        "--config", str(config_path),
        "--policy", str(policy_file),
        "--out-dir", str(out_dir),
        "--offline", str(transcripts),
    )
    assert code == 0
    assert "60 run record(s)" in out

    code, out, err = run_cli(capsys, "report", str(out_dir))
    assert code == 0
    assert "GPT-4 (S)" in out
    row = [line for line in out.splitlines() if line.startswith("GPT-4 (S)")][0]
    assert row.split()[-6:] == ["10", "10", "7", "4", "10", "10"]
    assert err == ""


def test_report_over_full_fixture_directory(tmp_path, capsys):
    writer = RecordWriter(tmp_path)
    for record in fixture_run_records():
        writer.append(record)
    code, out, err = run_cli(capsys, "report", str(tmp_path))
    assert code == 0
    lines = out.splitlines()
    assert lines[0].split() == ["Q1", "Q2", "Q3", "Q4", "Q5", "Q6"]
    rows = {line.rsplit(maxsplit=6)[0]: line.split()[-6:] for line in lines[1:5]}
    assert rows["GPT-3.5 (S)"] == ["10", "10", "10", "0", "0", "10"]
    assert rows["GPT-4 (L)"] == ["10", "10", "7", "2", "10", "10"]
    assert err == ""


def test_report_incomplete_grid_warns(tmp_path, capsys):
    writer = RecordWriter(tmp_path)
    records = fixture_run_records()
    for record in records[:-1]:
        writer.append(record)
    code, out, err = run_cli(capsys, "report", str(tmp_path), "--majority")
    assert code == 0
    assert "incomplete run grid" in err
    assert "majority GPT-4 (S): q1:yes" in out


def test_live_run_without_endpoint_is_data_error(policy_file, tmp_path, capsys):
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"model_id": "GPT-4"}), encoding="utf-8")
    code, _, err = run_cli(
        capsys,
        "run", "--config", str(config_path),
        "--policy", str(policy_file),
        "--out-dir", str(tmp_path / "records"),
    )
    assert code == 1
    assert "endpoint" in err


def test_missing_file_is_data_error(capsys, tmp_path):
    code, _, err = run_cli(capsys, "validate", "--policy", str(tmp_path / "absent.txt"))
    assert code == 1
    assert "error" in err


def test_usage_error_exits_two(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["parse"])  # missing required --policy
    assert excinfo.value.code == 2


def test_packaged_email_fixture_matches_builder(capsys, tmp_path):
    from fullpolicy.fixtures import data_text

    assert data_text("email_paragraph_policy.txt") == render_text(email_paragraph_policy())
    assert data_text("orderoo_policy.txt") == render_text(sample_policy())
    proc, shar = render_tabular(sample_policy())
    assert data_text("orderoo.processing.csv") == proc
    assert data_text("orderoo.sharing.csv") == shar
