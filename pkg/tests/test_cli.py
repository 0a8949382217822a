"""Command-line interface: exit codes, determinism, and output schemas."""

import pytest

from uavlink import cli
from uavlink import throughput as tp
from uavlink.scenario_io import load_scenario_file, read_results

BASIC = """
nodes:
  - id: src
    role: source
    position: [5.0, 5.0, 0.0]
    transmit_power: 0.6
    fading: rician
    beta: 4.0
  - id: i0
    role: interferer
    position: [30.0, 30.0, 0.0]
    transmit_power: 0.8
    fading: rician
    beta: 4.0
"""


@pytest.fixture
def scenario_path(tmp_path):
    path = tmp_path / "scenario.yaml"
    path.write_text(BASIC)
    return str(path)


class TestEvaluate:
    def test_prints_all_fields_and_succeeds(self, scenario_path, capsys):
        code = cli.main(["evaluate", "--scenario", scenario_path])
        out = capsys.readouterr().out
        assert code == 0
        for field in ("p_delay", "p_overflow", "p_error", "p_loss", "throughput"):
            assert field in out
        rate = float(out.split("throughput =")[1].strip())
        assert 0.0 < rate <= 80.0

    def test_beta_override_changes_output(self, scenario_path, capsys):
        cli.main(["evaluate", "--scenario", scenario_path])
        base = capsys.readouterr().out
        cli.main(["evaluate", "--scenario", scenario_path, "--beta", "i0=8.0"])
        boosted = capsys.readouterr().out
        assert base != boosted

    def test_threshold_at_bound_exits_two(self, scenario_path, capsys):
        scenario = load_scenario_file(scenario_path)
        view = tp.source_view(scenario)
        upper = tp.beta_upper(view.model, view.queue, view.num_channels)
        code = cli.main(["evaluate", "--scenario", scenario_path, "--beta", f"src={upper}"])
        captured = capsys.readouterr()
        assert code == 2
        assert "boundary" in captured.err or "infeasible" in captured.err

    def test_threshold_beyond_bound_exits_two(self, scenario_path, capsys):
        code = cli.main(["evaluate", "--scenario", scenario_path, "--beta", "src=30.0"])
        assert code == 2
        assert "infeasible" in capsys.readouterr().err

    def test_missing_file_exits_one(self, tmp_path, capsys):
        code = cli.main(["evaluate", "--scenario", str(tmp_path / "nope.yaml")])
        assert code == 1
        assert "not found" in capsys.readouterr().err

    def test_unknown_node_in_beta_override_exits_one(self, scenario_path, capsys):
        code = cli.main(["evaluate", "--scenario", scenario_path, "--beta", "ghost=1.0"])
        assert code == 1
        assert "ghost" in capsys.readouterr().err

    def test_silencing_interferer_via_inf(self, scenario_path, capsys):
        code = cli.main(["evaluate", "--scenario", scenario_path, "--beta", "i0=inf"])
        assert code == 0
        out = capsys.readouterr().out
        assert float(out.split("p_error")[1].split("=")[1].split()[0]) == pytest.approx(
            0.0, abs=1e-9
        )

    def test_approx_never_exceeds_exact(self, scenario_path, capsys):
        cli.main(["evaluate", "--scenario", scenario_path, "--exact"])
        exact = float(capsys.readouterr().out.split("throughput =")[1].strip())
        cli.main(["evaluate", "--scenario", scenario_path, "--approx"])
        approx = float(capsys.readouterr().out.split("throughput =")[1].strip())
        assert approx <= exact + 1e-9


class TestSweep:
    def test_single_point_sweep_matches_evaluate(self, scenario_path, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        code = cli.main([
            "sweep", "--scenario", scenario_path, "--var", "beta_m",
            "--values", "4.0", "--out", str(out),
        ])
        assert code == 0
        rows = read_results(out)
        assert len(rows) == 1
        cli.main(["evaluate", "--scenario", scenario_path])
        printed = capsys.readouterr().out
        rate = float(printed.split("throughput =")[1].strip())
        assert rows[0]["throughput"] == pytest.approx(rate, rel=1e-9)

    def test_preset_writes_expected_columns(self, tmp_path):
        out = tmp_path / "fig5.csv"
        code = cli.main(["sweep", "--preset", "fig5", "--out", str(out)])
        assert code == 0
        rows = read_results(out)
        assert rows
        assert set(rows[0]) == {"t_slt", "beta_n", "queue_drop"}

    def test_preset_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        cli.main(["sweep", "--preset", "fig5", "--out", str(a)])
        cli.main(["sweep", "--preset", "fig5", "--out", str(b)])
        assert a.read_text() == b.read_text()

    def test_unknown_variable_is_usage_error(self, scenario_path):
        code = cli.main([
            "sweep", "--scenario", scenario_path, "--var", "altitude", "--values", "1",
        ])
        assert code == 1

    def test_missing_axis_is_usage_error(self, scenario_path, capsys):
        code = cli.main(["sweep", "--scenario", scenario_path])
        assert code == 1
        assert "preset" in capsys.readouterr().err


class TestSimulate:
    def test_reports_gap_columns(self, scenario_path, tmp_path, capsys):
        out = tmp_path / "sim.csv"
        code = cli.main([
            "simulate", "--scenario", scenario_path, "--slots", "4000",
            "--replications", "2", "--seed", "5", "--warmup", "100",
            "--out", str(out),
        ])
        printed = capsys.readouterr().out
        assert code == 0
        assert "analytic" in printed and "empirical" in printed
        rows = read_results(out)
        assert {r["metric"] for r in rows} == {"p_delay", "p_overflow", "p_error", "throughput"}
        for row in rows:
            assert row["gap"] == pytest.approx(
                abs(row["analytic"] - row["empirical"]), abs=1e-9
            )

    def test_fixed_seed_reproduces_stdout(self, scenario_path, capsys):
        args = ["simulate", "--scenario", scenario_path, "--slots", "3000",
                "--replications", "2", "--seed", "9", "--warmup", "50"]
        cli.main(args)
        first = capsys.readouterr().out
        cli.main(args)
        second = capsys.readouterr().out
        assert first == second


class TestOptimize:
    def test_single_node_converges_quickly(self, tmp_path, capsys):
        path = tmp_path / "solo.yaml"
        path.write_text(
            "nodes:\n"
            "  - {id: solo, role: source, position: [5.0, 5.0, 0.0],\n"
            "     transmit_power: 0.7, fading: rician, beta: 1.0}\n"
        )
        trace = tmp_path / "trace.csv"
        code = cli.main([
            "optimize", "--scenario", str(path), "--grid", "24",
            "--tol", "1e-6", "--max-iters", "10", "--out", str(trace),
        ])
        printed = capsys.readouterr().out
        assert code == 0
        assert "converged" in printed
        iterations = int(printed.split("iterations =")[1].split()[0])
        assert iterations <= 2
        rows = read_results(trace)
        assert len(rows) == iterations  # one node: rows == iterations
        assert set(rows[0]) == {"iteration", "node", "beta", "throughput"}


class TestHelp:
    @pytest.mark.parametrize(
        "command,flags",
        [
            ("evaluate", ["--scenario", "--beta", "--exact", "--approx", "--out"]),
            ("sweep", ["--scenario", "--preset", "--seed", "--var", "--values", "--out"]),
            ("simulate", ["--scenario", "--slots", "--replications", "--seed", "--warmup", "--beta"]),
            ("optimize", ["--scenario", "--grid", "--tol", "--max-iters", "--objective"]),
        ],
    )
    def test_help_documents_every_flag(self, command, flags, capsys):
        with pytest.raises(SystemExit) as excinfo:
            cli.build_parser().parse_args([command, "--help"])
        assert excinfo.value.code == 0
        text = capsys.readouterr().out
        for flag in flags:
            assert flag in text

    def test_no_command_is_usage_error(self):
        assert cli.main([]) == 1
