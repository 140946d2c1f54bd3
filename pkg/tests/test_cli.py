import json

import pytest

from rpu.cli import bundled_game_path, bundled_games, load_game_file, main

ALL_BUNDLED = [
    "montyhall",
    "fairdie",
    "example3",
    "message_discard",
    "outcome_discard",
    "triangle_discard",
    "four_cycle",
    "hard01_triangle",
    "negation4",
    "uniform_2of4",
    "twocomponents",
]


def run(capsys, *argv) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestGameFiles:
    def test_all_bundled_files_listed(self):
        assert sorted(ALL_BUNDLED) == bundled_games()

    @pytest.mark.parametrize("name", ALL_BUNDLED)
    def test_bundled_files_parse(self, name):
        game, normal = load_game_file(bundled_game_path(name))
        assert game.n_outcomes >= 2
        assert abs(sum(normal["marginal"]) - 1.0) < 1e-12

    def test_fraction_strings_parse_exactly(self):
        game, _ = load_game_file(bundled_game_path("montyhall"))
        assert game.marginal[0] == 1 / 3

    def test_bad_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        code = main(["validate", str(path)])
        assert code == 2

    def test_missing_file(self):
        assert main(["validate", "/nonexistent/game.json"]) == 2


class TestValidateCommand:
    def test_montyhall_summary(self, capsys):
        code, out, _ = run(capsys, "validate", bundled_game_path("montyhall"))
        assert code == 0
        assert "3 outcomes, 2 messages, connected, graph, matroid" in out

    def test_unnormalized_marginal_exit_2(self, tmp_path, capsys):
        path = tmp_path / "g.json"
        path.write_text(
            json.dumps(
                {
                    "outcomes": ["a", "b"],
                    "messages": [["a", "b"]],
                    "marginal": [0.5, 0.4],
                }
            )
        )
        code, _, err = run(capsys, "validate", str(path))
        assert code == 2
        assert "0.9" in err

    def test_duplicate_message_exit_2(self, tmp_path, capsys):
        path = tmp_path / "g.json"
        path.write_text(
            json.dumps(
                {
                    "outcomes": ["a", "b"],
                    "messages": [["a", "b"], ["b", "a"]],
                    "marginal": [0.5, 0.5],
                }
            )
        )
        code, _, err = run(capsys, "validate", str(path))
        assert code == 2
        assert "duplicate" in err.lower()


class TestSolveCommand:
    def test_montyhall_table(self, capsys):
        code, out, _ = run(
            capsys, "solve", bundled_game_path("montyhall"), "--restarts", "2"
        )
        assert code == 0
        assert "0.333333  0.166667" in out
        assert "PASS certificate" in out

    def test_loss_override(self, capsys):
        code, out, _ = run(
            capsys,
            "solve",
            bundled_game_path("montyhall"),
            "--loss",
            "rand01",
            "--restarts",
            "1",
            "--json",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["value"] == pytest.approx(1 / 3, abs=1e-9)
        assert payload["kt"] == pytest.approx([0.0, 1.0, 0.0], abs=1e-8)

    def test_example3_brier(self, capsys):
        code, out, _ = run(
            capsys,
            "solve",
            bundled_game_path("example3"),
            "--loss",
            "brier",
            "--restarts",
            "1",
            "--json",
        )
        payload = json.loads(out)
        assert payload["strategy"][0][1] == pytest.approx(0.2026, abs=1e-3)

    def test_hard01_reports_both_values(self, capsys):
        code, out, _ = run(
            capsys, "solve", bundled_game_path("hard01_triangle"), "--restarts", "1"
        )
        assert code == 0
        assert "maximin value = 0.5" in out
        assert "no Nash equilibrium" in out
        assert "0.666666" in out

    def test_json_runs_are_byte_identical(self, capsys):
        args = ("solve", bundled_game_path("example3"), "--restarts", "2", "--seed", "3", "--json")
        _, out1, _ = run(capsys, *args)
        _, out2, _ = run(capsys, *args)
        assert out1 == out2

    def test_json_reingestion_reproduces_report_bytes(self, tmp_path, capsys):
        args = ("solve", bundled_game_path("triangle_discard"), "--restarts", "1", "--json")
        _, out1, _ = run(capsys, *args)
        payload = json.loads(out1)
        path = tmp_path / "echo.json"
        path.write_text(json.dumps(payload["game"]))
        _, out2, _ = run(capsys, "solve", str(path), "--restarts", "1", "--json")
        assert out2 == out1


class TestRcarCommand:
    def test_fairdie(self, capsys):
        code, out, _ = run(capsys, "rcar", bundled_game_path("fairdie"), "--restarts", "1")
        assert code == 0
        assert "q = [0.333333, 0.333333, 0.166667, 0.166667, 0.333333, 0.333333]" in out

    def test_triangle_notes_slack_message(self, capsys):
        code, out, _ = run(
            capsys, "rcar", bundled_game_path("triangle_discard"), "--restarts", "1"
        )
        assert code == 0
        assert "q = [0.400000, 0.600000, 0.400000]" in out
        assert "sum = 0.800000" in out
        assert "y3" in out

    def test_partition_naive_conditionals(self, tmp_path, capsys):
        path = tmp_path / "g.json"
        path.write_text(
            json.dumps(
                {
                    "outcomes": ["a", "b", "c"],
                    "messages": [["a", "b"], ["c"]],
                    "marginal": [0.3, 0.2, 0.5],
                }
            )
        )
        code, out, _ = run(capsys, "rcar", str(path), "--restarts", "1", "--json")
        assert code == 0
        payload = json.loads(out)
        assert payload["q"] == pytest.approx([0.6, 0.4, 1.0], abs=1e-8)


class TestStructureCommands:
    def test_classify_montyhall(self, capsys):
        code, out, _ = run(capsys, "classify", bundled_game_path("montyhall"))
        assert code == 0
        assert "graph: yes" in out and "matroid: yes" in out

    def test_decompose_twocomponents(self, capsys):
        code, out, _ = run(capsys, "decompose", bundled_game_path("twocomponents"), "--json")
        assert code == 0
        payload = json.loads(out)
        assert len(payload["components"]) == 2
        assert [c["weight"] for c in payload["components"]] == pytest.approx([0.5, 0.5])

    def test_counterexample_fairdie(self, capsys):
        code, out, _ = run(
            capsys, "counterexample", bundled_game_path("fairdie"), "--restarts", "1", "--json"
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["log_rcar_passed"] is True
        assert payload["brier_rcar_violation"] > 1e-3

    def test_counterexample_not_applicable(self, capsys):
        code, _, err = run(capsys, "counterexample", bundled_game_path("montyhall"))
        assert code == 3
        assert "NotApplicable" in err


class TestOracleAndVerify:
    def test_oracle_montyhall(self, capsys):
        code, out, _ = run(
            capsys,
            "oracle",
            bundled_game_path("montyhall"),
            "--resolution",
            "150",
            "--restarts",
            "1",
            "--json",
        )
        assert code == 0
        payload = json.loads(out)
        assert abs(payload["difference"]) <= 1e-3

    def test_oracle_too_large(self, capsys):
        code, _, err = run(
            capsys, "oracle", bundled_game_path("fairdie"), "--resolution", "100000"
        )
        assert code == 3
        assert "TooLarge" in err

    def test_verify_montyhall(self, capsys):
        code, out, _ = run(capsys, "verify", bundled_game_path("montyhall"), "--restarts", "1")
        assert code == 0
        assert out.count("PASS") == 2

    @pytest.mark.parametrize("name", ALL_BUNDLED)
    def test_all_bundled_games_solve(self, name, capsys):
        code, out, _ = run(capsys, "solve", bundled_game_path(name), "--restarts", "1", "--json")
        assert code == 0
        payload = json.loads(out)
        assert payload["converged"] is True
        assert payload["certificate"]["passed"] is True


class TestSeedHandling:
    def test_env_seed_used(self, capsys, monkeypatch):
        monkeypatch.setenv("RPU_SEED", "17")
        _, out, _ = run(capsys, "solve", bundled_game_path("montyhall"), "--restarts", "1", "--json")
        assert json.loads(out)["options"]["seed"] == 17

    def test_flag_overrides_env(self, capsys, monkeypatch):
        monkeypatch.setenv("RPU_SEED", "17")
        _, out, _ = run(
            capsys,
            "solve",
            bundled_game_path("montyhall"),
            "--restarts",
            "1",
            "--seed",
            "4",
            "--json",
        )
        assert json.loads(out)["options"]["seed"] == 4
