"""命令行入口：输出格式、配置合并与退出码"""
import json
from fractions import Fraction
from io import StringIO

from app.main import main
from tests.broken_protocols import BROKEN_REGISTRY


def _invoke(argv, registry=None):
    out = StringIO()
    code = main(argv, out=out, registry=registry)
    return code, out.getvalue()


RUN_ARGS = [
    "run", "--protocol", "poly-l", "--f1", "hamming",
    "--generator", "half-mismatch", "--n", "8", "--m", "4", "--seed", "3",
]


def test_run_json():
    code, text = _invoke(RUN_ARGS + ["--format", "json"])
    assert code == 0
    (summary,) = json.loads(text)["results"]
    assert summary["protocol"] == "poly-l"
    assert summary["n"] == 8 and summary["m"] == 4
    assert len(summary["index_set"]) == 4
    assert summary["truth"] == "1/2"
    assert summary["total_bits"] == summary["index_bits"] + summary["extra_bits"]
    assert summary["config"]["seed"] == 3
    assert summary["config"]["enumeration_budget"] > 0


def test_run_text_echoes_config():
    code, text = _invoke(RUN_ARGS)
    assert code == 0
    assert "# protocol: poly-l" in text
    assert "# seed: 3" in text
    assert "estimate" in text


def test_run_is_deterministic():
    assert _invoke(RUN_ARGS) == _invoke(RUN_ARGS)


def test_run_from_files(tmp_path):
    (tmp_path / "x.txt").write_text("0 1 1 0\n1 0\n", encoding="utf-8")
    (tmp_path / "y.txt").write_text("0 0 1 1\n1 1\n", encoding="utf-8")
    transcript = tmp_path / "run.transcript"
    code, text = _invoke([
        "run", "--protocol", "otp", "--x", str(tmp_path / "x.txt"), "--y", str(tmp_path / "y.txt"),
        "--m", "equal-n", "--seed", "1", "--format", "json", "--transcript", str(transcript),
    ])
    assert code == 0
    (summary,) = json.loads(text)["results"]
    assert summary["m"] == 6
    assert summary["abs_error"] == "0"
    assert summary["estimate"] == str(Fraction(1, 2))
    assert "# randomness" in transcript.read_text(encoding="utf-8")


def test_run_output_file(tmp_path):
    target = tmp_path / "summary.json"
    code, text = _invoke(RUN_ARGS + ["--format", "json", "--output", str(target)])
    assert code == 0
    assert text == ""
    assert json.loads(target.read_text(encoding="utf-8"))["results"][0]["seed"] == 3


def test_run_requires_seed():
    code, _ = _invoke(["run", "--generator", "all-match", "--n", "4", "--m", "2"])
    assert code == 2


def test_run_rejects_m_above_n():
    code, _ = _invoke(["run", "--generator", "all-match", "--n", "4", "--m", "5", "--seed", "0"])
    assert code == 2


def test_run_rejects_bad_sequence_file(tmp_path):
    (tmp_path / "x.txt").write_text("0 1\n2\n", encoding="utf-8")
    (tmp_path / "y.txt").write_text("0 1 1\n", encoding="utf-8")
    code, _ = _invoke([
        "run", "--x", str(tmp_path / "x.txt"), "--y", str(tmp_path / "y.txt"), "--m", "1", "--seed", "0",
    ])
    assert code == 2


def test_rerandomize_rejected_for_one_time_pad():
    code, _ = _invoke(["run", "--protocol", "otp", "--generator", "all-match", "--n", "4", "--m", "2",
                       "--seed", "0", "--rerandomize"])
    assert code == 2


def test_unknown_subcommand():
    code, _ = _invoke(["plot"])
    assert code == 2


def test_audit_passes_for_one_time_pad():
    code, text = _invoke(["audit", "--protocol", "otp", "--n", "1", "--m", "1", "--format", "csv"])
    assert code == 0
    lines = text.splitlines()
    assert lines[0].startswith("protocol,definition")
    assert len(lines) == 4
    assert all(",pass," in line for line in lines[1:])


def test_audit_failure_exit_code():
    code, text = _invoke(["audit", "--protocol", "poly-l", "--f1", "product", "--n", "2", "--m", "1",
                          "--format", "json"])
    assert code == 1
    verdicts = {r["definition"]: r["verdict"] for r in json.loads(text)["results"]}
    assert verdicts["against_charlie"] == "fail"


AUDIT_EXAMPLE = ["audit", "--protocol", "poly-l", "--n", "2", "--m", "1", "--alphabets", "2,2"]


def test_audit_example_reports_charlie_leak():
    code, text = _invoke(AUDIT_EXAMPLE)
    assert code == 1
    rows = {line.split()[1]: line.split() for line in text.splitlines() if line.startswith("poly-l ")}
    assert [rows[d][3] for d in ("against_alice", "against_bob", "against_charlie")] == ["pass", "pass", "fail"]

    _, text = _invoke(AUDIT_EXAMPLE + ["--format", "json"])
    results = {r["definition"]: r for r in json.loads(text)["results"]}
    assert results["against_charlie"]["verdict"] == "fail"
    assert Fraction(results["against_charlie"]["worst_distance"]) == Fraction(4, 5)
    assert results["against_charlie"]["modulus"] == 5


def test_audit_example_passes_with_rerandomize():
    code, text = _invoke(AUDIT_EXAMPLE + ["--rerandomize", "--format", "csv"])
    assert code == 0
    lines = text.splitlines()[1:]
    assert [line.split(",")[1] for line in lines] == ["against_alice", "against_bob", "against_charlie"]
    assert all(line.split(",")[3] == "pass" for line in lines)


def test_audit_with_injected_registry():
    code, _ = _invoke(
        ["audit", "--protocol", "otp-saltless", "--f1", "product", "--n", "2", "--m", "1"],
        registry=BROKEN_REGISTRY,
    )
    assert code == 1


def test_audit_budget_exit_code():
    code, _ = _invoke(["audit", "--protocol", "otp", "--n", "2", "--m", "1", "--audit-budget", "10"])
    assert code == 2


def test_distortion_csv():
    code, text = _invoke(["distortion", "--f1", "hamming", "--n", "2,3", "--m", "1,2", "--seed", "0"])
    assert code == 0
    lines = text.split("\r\n")
    assert lines[0] == "n,m,e_n,bound,R,protocol,method,seed,trials"
    assert [line.split(",")[:2] for line in lines[1:5]] == [["2", "1"], ["2", "2"], ["3", "1"], ["3", "2"]]
    assert lines[5] == ""


def test_comm_cost_text(tmp_path):
    config = tmp_path / "grid.yaml"
    config.write_text("protocol: poly-l\nn: [1024]\nm: 32\nmodulus: 211\n", encoding="utf-8")
    code, text = _invoke(["comm-cost", "--config", str(config), "--format", "text"])
    assert code == 0
    assert "# modulus: 211" in text
    assert "2384" in text


def test_flags_override_config_file(tmp_path):
    config = tmp_path / "grid.yaml"
    config.write_text("protocol: otp\nn: [64, 256]\nm_rule: sqrt\n", encoding="utf-8")
    code, text = _invoke(["comm-cost", "--config", str(config), "--protocol", "poly-l", "--format", "json"])
    assert code == 0
    rows = json.loads(text)["results"]
    assert [row["protocol"] for row in rows] == ["poly-l", "poly-l"]
    assert [row["m"] for row in rows] == [8, 16]


def test_bad_config_file(tmp_path):
    config = tmp_path / "bad.yaml"
    config.write_text("protocol: [otp\n", encoding="utf-8")
    code, _ = _invoke(["comm-cost", "--config", str(config)])
    assert code == 2
    code, _ = _invoke(["comm-cost", "--config", str(tmp_path / "missing.yaml")])
    assert code == 2


def test_empty_grid_is_header_only():
    code, text = _invoke(["comm-cost", "--n", "", "--m-rule", "sqrt"])
    assert code == 0
    assert text == "protocol,n,m,modulus,index_bits,extra_bits,k,R\r\n"
