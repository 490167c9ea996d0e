"""CLI behaviour: subcommands, exit codes, provider wiring."""

from __future__ import annotations

import json

from narrafact.cli import main

from pipeline_fixtures import GOLDEN_RESPONSES, MINI_NARRATIVE


def write_inputs(tmp_path):
    narrative_path = tmp_path / "narrative.json"
    narrative_path.write_text(json.dumps(MINI_NARRATIVE))
    script_path = tmp_path / "script.json"
    script_path.write_text(json.dumps(GOLDEN_RESPONSES))
    return narrative_path, script_path


def run_cli(tmp_path, script_path, *args: str) -> int:
    base = [
        "--runs-dir", str(tmp_path / "runs"),
        "--provider", "scripted",
        "--script", str(script_path),
    ]
    return main(base + list(args))


def test_full_pipeline_via_cli(tmp_path, capsys):
    narrative_path, script_path = write_inputs(tmp_path)
    assert run_cli(tmp_path, script_path, "--rounds", "1", "--tau", "1", "ingest", str(narrative_path)) == 0
    run_id = json.loads(capsys.readouterr().out)["run_id"]

    assert run_cli(tmp_path, script_path, "kg", run_id) == 0
    out = capsys.readouterr().out
    assert "3 characters" in out
    assert "<subject>Mira" in out

    # the scripted queue is reloaded per invocation, so drop consumed entries
    script_path.write_text(json.dumps(GOLDEN_RESPONSES[3:]))
    assert run_cli(tmp_path, script_path, "summarize", run_id) == 0
    assert "apprentice at the lighthouse" in capsys.readouterr().out

    script_path.write_text(json.dumps(GOLDEN_RESPONSES[4:]))
    assert run_cli(tmp_path, script_path, "score", run_id) == 0
    score_line = json.loads(capsys.readouterr().out)
    assert score_line == {"score": 0.75, "z": 4, "false": [3]}

    script_path.write_text(json.dumps(GOLDEN_RESPONSES[10:]))
    assert run_cli(tmp_path, script_path, "refine", run_id, "--iterations", "3") == 0
    refine_line = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert refine_line == {"iteration": 1, "score": 1.0}

    assert run_cli(tmp_path, script_path, "export", run_id, "--kind", "text_summary") == 0
    export_path = capsys.readouterr().out.strip()
    assert "Mira tends the great lamp" in open(export_path).read()


def test_usage_errors_exit_1(tmp_path, capsys):
    assert main([]) == 1
    assert main(["--runs-dir", str(tmp_path), "frobnicate"]) == 1
    assert main(["--runs-dir", str(tmp_path), "--provider", "scripted", "kg", "x"]) == 1  # missing --script
    capsys.readouterr()


def test_pipeline_errors_exit_2(tmp_path, capsys):
    narrative_path, script_path = write_inputs(tmp_path)
    script_path.write_text(json.dumps([]))
    assert run_cli(tmp_path, script_path, "ingest", str(narrative_path)) == 0
    run_id = json.loads(capsys.readouterr().out)["run_id"]
    # empty scripted queue -> provider exhausted -> pipeline error
    assert run_cli(tmp_path, script_path, "kg", run_id) == 2
    # illegal transition -> pipeline error
    assert run_cli(tmp_path, script_path, "refine", run_id) == 2
    capsys.readouterr()


def test_eval_correlate(tmp_path, capsys):
    human = tmp_path / "human.csv"
    human.write_text("unit_id,human_score\nu1,1\nu2,2\nu3,3\nu4,4\n")
    metrics = tmp_path / "metrics.csv"
    metrics.write_text(
        "unit_id,metric,score\n"
        "u1,nfs,0.1\nu2,nfs,0.4\nu3,nfs,0.6\nu4,nfs,0.9\n"
    )
    code = main([
        "--runs-dir", str(tmp_path / "runs"),
        "eval", "correlate", str(metrics), "--human", str(human),
        "--permutations", "200", "--seed", "1", "--json",
    ])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    row = payload["rows"][0]
    assert row["metric"] == "nfs"
    assert row["spearman"] == 1.0
    assert row["kendall"] == 1.0


def test_eval_perturb(tmp_path, capsys):
    narrative_path, script_path = write_inputs(tmp_path)
    assert run_cli(tmp_path, script_path, "--rounds", "1", "--tau", "1", "ingest", str(narrative_path)) == 0
    run_id = json.loads(capsys.readouterr().out)["run_id"]
    assert run_cli(tmp_path, script_path, "kg", run_id) == 0
    script_path.write_text(json.dumps(GOLDEN_RESPONSES[3:4]))
    assert run_cli(tmp_path, script_path, "summarize", run_id) == 0
    capsys.readouterr()

    # perturbation harness: rewrite two sentences, then score both versions
    perturb_script = [
        "Mira becomes Old Tom's rival at the lighthouse.",
        "During the storm Tom abandons the great lamp and strands Captain Reyes at sea.",
        # score reference: decompose 2 sentences -> 4 facts -> all true
        "ref f1\nref f2", "ref f3\nref f4", "1", "1", "1", "1",
        # score perturbed: 4 facts -> all false
        "bad f1\nbad f2", "bad f3\nbad f4",
        "False, wrong.", "False, wrong.", "False, wrong.", "False, wrong.",
    ]
    script_path.write_text(json.dumps(perturb_script))
    assert run_cli(tmp_path, script_path, "eval", "perturb", run_id) == 0
    case = json.loads(capsys.readouterr().out)
    nfs = case["scores"]["narrative_fact_score"]
    rl = case["scores"]["rouge_l"]
    nfs_drop = (nfs["before"] - nfs["after"]) / nfs["before"]
    rl_drop = (rl["before"] - rl["after"]) / rl["before"]
    assert nfs_drop > rl_drop
