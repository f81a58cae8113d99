import json

import pytest

from beaverlab.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestRun:
    def test_one_step_halter(self, capsys):
        code, out, _ = run_cli(capsys, "run", "1RZ1RZ")
        assert code == 0
        assert "Halted steps=1 nonblank=1" in out

    def test_champion(self, capsys):
        code, out, _ = run_cli(capsys, "run", "1RB1LB_1LA1RZ")
        assert code == 0
        assert "Halted steps=6 nonblank=4" in out

    def test_cycler_status(self, capsys):
        code, out, _ = run_cli(capsys, "run", "1RA1RA", "--max-steps", "50")
        assert code == 4

    def test_step_limit_status(self, capsys):
        code, out, _ = run_cli(
            capsys, "run", "1RA1RA", "--max-steps", "50", "--no-cycle-detect"
        )
        assert code == 5

    def test_parse_error_is_usage(self, capsys):
        code, _, err = run_cli(capsys, "run", "1XZ")
        assert code == 1
        assert "error" in err

    def test_json_lines(self, capsys):
        code, out, _ = run_cli(capsys, "run", "1RZ1RZ", "--json-lines")
        payload = json.loads(out.splitlines()[0])
        assert payload["steps"] == 1 and payload["verdict"] == "halted"


class TestSearch:
    def test_search_2_2(self, capsys):
        code, out, _ = run_cli(capsys, "search", "2", "2")
        assert code == 0
        assert "sigma=4 s_max=6" in out

    def test_search_guard(self, capsys):
        code, _, err = run_cli(capsys, "search", "5", "2")
        assert code == 3
        assert "guard" in err

    def test_ledger_append_and_reverify(self, capsys, tmp_path):
        ledger = str(tmp_path / "ledger.jsonl")
        code, out, _ = run_cli(capsys, "search", "2", "2", "--ledger", ledger)
        assert code == 0
        records = [json.loads(line) for line in open(ledger)]
        assert records
        for rec in records:
            code, out, _ = run_cli(capsys, "run", rec["machine"])
            assert code == 0
            assert f"steps={rec['steps']} nonblank={rec['nonblank']}" in out


class TestTransform:
    def test_add_state(self, capsys):
        code, out, _ = run_cli(capsys, "transform", "--kind", "add-state", "1RZ1RZ")
        assert code == 0
        assert "steps 1 -> 2" in out

    def test_triple_no_turns(self, capsys):
        code, out, _ = run_cli(capsys, "transform", "--kind", "triple", "1RZ1RZ")
        assert code == 0
        assert "steps 1 -> 1" in out

    def test_third_symbol_with_ledger(self, capsys, tmp_path):
        ledger = str(tmp_path / "ledger.jsonl")
        run_cli(capsys, "search", "2", "2", "--ledger", ledger)
        code, out, _ = run_cli(
            capsys,
            "transform", "--kind", "third-symbol", "1RB1LB_1LA1RZ",
            "--ledger", ledger,
        )
        assert code == 0
        assert "steps 6 -> 8" in out

    def test_third_symbol_without_evidence_fails(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys,
            "transform", "--kind", "third-symbol", "1RB1LB_1LA1RZ",
            "--ledger", str(tmp_path / "missing.jsonl"),
        )
        assert code == 2
        assert "NotChampion" in err

    def test_two_state(self, capsys):
        code, out, _ = run_cli(capsys, "transform", "--kind", "two-state", "1RB1LB_1LA1RZ")
        assert code == 0
        assert "[extended format]" in out
        assert ";" in out.splitlines()[0]


class TestVerify:
    @pytest.mark.parametrize("suite", ["lemma1", "lemma2", "lemma3", "thm4", "introspect"])
    def test_suites_pass_2_2(self, capsys, suite):
        code, out, _ = run_cli(capsys, "verify", "--suite", suite, "2", "2")
        assert code == 0
        assert out.startswith("PASS")

    def test_thm2_2_2(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--suite", "thm2", "2", "2")
        assert code == 0


class TestEncodeDecode:
    def test_round_trip(self, capsys):
        code, out, _ = run_cli(capsys, "encode", "1RB1LB_1LA1RZ")
        assert code == 0
        normalized, bits = out.splitlines()[:2]
        code, out, _ = run_cli(capsys, "decode", bits, "--symbols", "2")
        assert code == 0
        decoded = out.splitlines()[0]
        code, out, _ = run_cli(capsys, "run", decoded)
        assert "steps=6 nonblank=4" in out


class TestTable:
    def test_small_grid(self, capsys):
        code, out, _ = run_cli(capsys, "table", "--max-n", "2", "--max-m", "2")
        assert code == 0
        assert "1/1" in out and "4/6" in out
