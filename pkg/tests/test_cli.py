"""CLI: subcommand wiring, exit codes, deterministic output."""

from __future__ import annotations

import json

import pytest

from congames.cli import main


def run(capsys, *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


GEN = [
    "gen-random", "--seed", "7", "--n", "3", "--d", "1", "--resources", "4",
    "--strategies", "2", "--max-size", "2",
    "--coeff-range", "1/4:2", "--weight-range", "1:3",
]


class TestUsageErrors:
    def test_unknown_flag(self, capsys):
        code, _, err = run(capsys, "poa", "--bogus")
        assert code == 1
        assert "usage" in err

    def test_missing_subcommand(self, capsys):
        code, _, _ = run(capsys)
        assert code == 1

    def test_unknown_subcommand(self, capsys):
        code, _, _ = run(capsys, "frobnicate")
        assert code == 1


class TestPoa:
    def test_golden_ratio_line(self, capsys):
        code, out, _ = run(capsys, "poa", "--d", "1", "--rho", "1")
        assert code == 0
        assert "1.618034" in out and "2.618034" in out

    def test_decimal_rho_rejected(self, capsys):
        code, _, err = run(capsys, "poa", "--d", "1", "--rho", "1.5")
        assert code == 3
        assert "rational" in err

    def test_table_csv(self, capsys):
        code, out, _ = run(capsys, "poa", "--rho", "3/2", "--table", "3", "--format", "csv")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].startswith("d,rho,phi")
        assert len(lines) == 4

    def test_json_format(self, capsys):
        code, out, _ = run(capsys, "poa", "--d", "2", "--rho", "1", "--format", "json")
        assert code == 0
        rows = json.loads(out)
        assert rows[0]["d"] == 2


class TestPipeline:
    def test_solve_audit_verify(self, tmp_path, capsys):
        game = tmp_path / "game.json"
        state = tmp_path / "state.json"
        trace = tmp_path / "trace.jsonl"
        code, _, _ = run(capsys, *GEN, "--out", str(game))
        assert code == 0
        code, out, _ = run(
            capsys, "solve", "--input", str(game), "--output", str(state),
            "--trace", str(trace),
        )
        assert code == 0
        assert "final equilibrium factor" in out
        code, out, _ = run(capsys, "audit", "--game", str(game), "--trace", str(trace))
        assert code == 0
        assert "audit: PASS" in out
        # the guaranteed ceiling for d=1: p(p+3)/(p-2) with p=160
        code, out, _ = run(
            capsys, "verify", "--game", str(game), "--state", str(state),
            "--rho", "26080/158",
        )
        assert code == 0
        assert "PASS" in out

    def test_verify_failure_exit_code(self, tmp_path, capsys):
        game = tmp_path / "game.json"
        state = tmp_path / "state.json"
        run(capsys, *GEN, "--out", str(game))
        # pick a deliberately bad state: all players on strategy 0 need not
        # be an exact equilibrium; demand factor <= 1/1000000 to force failure
        state.write_text('{"choices": [0, 0, 0]}')
        code, out, _ = run(
            capsys, "verify", "--game", str(game), "--state", str(state),
            "--rho", "1/1000000",
        )
        assert code == 2
        assert "FAIL" in out

    def test_audit_detects_tampering(self, tmp_path, capsys):
        game = tmp_path / "game.json"
        state = tmp_path / "state.json"
        trace = tmp_path / "trace.jsonl"
        run(capsys, *GEN, "--out", str(game))
        run(capsys, "solve", "--input", str(game), "--output", str(state), "--trace", str(trace))
        lines = trace.read_text().splitlines()
        if len(lines) > 1:
            doc = json.loads(lines[1])
            doc["cost_after"] = "1/7919"
            lines[1] = json.dumps(doc, sort_keys=True)
            trace.write_text("\n".join(lines) + "\n")
            code, _, err = run(capsys, "audit", "--game", str(game), "--trace", str(trace))
            assert code == 2
            assert "check failed" in err

    def test_gen_lb_and_verify_at_rho(self, tmp_path, capsys):
        game = tmp_path / "lb.json"
        code, out, _ = run(
            capsys, "gen-lb", "--d", "1", "--rho", "3/2", "--n", "4",
            "--precision", "30", "--out", str(game),
        )
        assert code == 0
        info = json.loads(out)
        assert info["equilibrium_state"] == [1, 1, 1, 1]
        state = tmp_path / "state.json"
        state.write_text(json.dumps({"choices": info["equilibrium_state"]}))
        code, out, _ = run(
            capsys, "verify", "--game", str(game), "--state", str(state), "--rho", "3/2",
        )
        assert code == 0

    def test_brute_poa_no_equilibrium(self, tmp_path, capsys):
        game = tmp_path / "game.json"
        run(capsys, *GEN, "--out", str(game))
        code, _, err = run(capsys, "brute-poa", "--game", str(game), "--rho", "1/2")
        assert code == 2
        assert "check failed" in err

    def test_brute_poa_on_lower_bound(self, tmp_path, capsys):
        game = tmp_path / "lb.json"
        run(capsys, "gen-lb", "--d", "1", "--rho", "1", "--n", "3",
            "--precision", "30", "--out", str(game))
        code, out, _ = run(capsys, "brute-poa", "--game", str(game), "--rho", "1")
        assert code == 0
        assert "poa:" in out and "1.70" in out


class TestInputErrors:
    def test_missing_file(self, capsys):
        code, _, err = run(capsys, "solve", "--input", "/nonexistent.json",
                           "--output", "/tmp/out.json")
        assert code == 3
        assert "input error" in err

    def test_malformed_game(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"degree": 1}')
        code, _, err = run(capsys, "brute-poa", "--game", str(bad), "--rho", "1")
        assert code == 3


class TestDeterminism:
    def test_gen_random_byte_identical(self, tmp_path, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run(capsys, *GEN, "--out", str(a))
        run(capsys, *GEN, "--out", str(b))
        assert a.read_bytes() == b.read_bytes()
