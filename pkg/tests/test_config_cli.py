"""Scenario parsing, validation diagnostics, CLI behavior, output schemas."""

import json

import pytest

from aggsim import cli, report
from aggsim.config import ParseError, ValidationError, load_scenario, parse_scenario
from aggsim.frames import AccessCategory
from aggsim.scheduler import Policy
from aggsim.traffic import Cbr, OnOff, Poisson

MINIMAL = """
[general]
duration_ms = 100

[flow]
ac = voice
model = cbr
period_us = 20000
payload_bytes = 160
"""

MIXED = """
[general]
name = mixed
duration_ms = 300
seed = 5

[phy]
data_rate_mbps = 248
ber = 0.00001

[scheduler]
policy = bi
ampdu_target_mpdus = 8

[flow]
id = 1
ac = voice
model = cbr
period_us = 20000
payload_bytes = 160

[flow]
id = 2
ac = video
model = onoff
on_us = 30000
off_us = 70000
period_us = 2000
payload_bytes = 1300

[flow]
id = 3
ac = best_effort
model = poisson
rate_per_s = 300
payload_bytes = 1500
"""


class TestParsing:
    def test_minimal_fills_defaults(self):
        scen = parse_scenario(MINIMAL)
        assert scen.name == "scenario"
        assert scen.duration_us == 100_000
        assert scen.seed == 0
        assert scen.phy.data_rate_mbps == 248.0
        assert scen.phy.sifs_us == 16 and scen.phy.difs_us == 34
        assert scen.scheduler.policy is Policy.DUAL_STAGE
        assert scen.scheduler.voice_timer_us == 500
        assert scen.scheduler.shared_timer_us == 2000
        assert scen.scheduler.ampdu_target == 16
        assert scen.retry_limit == 7
        (flow,) = scen.flows
        assert flow.ac is AccessCategory.VOICE
        assert isinstance(flow.model, Cbr)

    def test_full_scenario(self):
        scen = parse_scenario(MIXED)
        assert scen.name == "mixed"
        assert len(scen.flows) == 3
        assert isinstance(scen.flows[1].model, OnOff)
        assert isinstance(scen.flows[2].model, Poisson)
        assert scen.phy.ber == pytest.approx(1e-5)

    def test_comments_and_blank_lines(self):
        scen = parse_scenario("# header\n" + MINIMAL + "\n# trailing\n")
        assert scen.duration_us == 100_000

    def test_inline_comment(self):
        scen = parse_scenario(MINIMAL.replace("duration_ms = 100", "duration_ms = 100  # ms"))
        assert scen.duration_us == 100_000

    def test_parse_error_reports_line(self):
        bad = "[general]\nduration_ms = 100\nbogus line without equals\n"
        with pytest.raises(ParseError) as exc:
            parse_scenario(bad)
        assert exc.value.line_no == 3

    def test_unknown_section(self):
        with pytest.raises(ParseError):
            parse_scenario("[nonsense]\nx = 1\n")

    def test_duplicate_key(self):
        with pytest.raises(ParseError):
            parse_scenario("[general]\nseed = 1\nseed = 2\n")

    def test_binding_before_section(self):
        with pytest.raises(ParseError):
            parse_scenario("seed = 1\n")


class TestValidation:
    def test_ber_out_of_range(self):
        text = MINIMAL + "\n[phy]\nber = 1.5\n"
        with pytest.raises(ValidationError) as exc:
            parse_scenario(text)
        assert exc.value.key == "phy.ber"

    def test_missing_flows(self):
        with pytest.raises(ValidationError) as exc:
            parse_scenario("[general]\nduration_ms = 10\n")
        assert exc.value.key == "flow"

    def test_unknown_key_flagged(self):
        with pytest.raises(ValidationError) as exc:
            parse_scenario(MINIMAL + "\n[phy]\nwarp_factor = 9\n")
        assert exc.value.key == "phy.warp_factor"

    def test_flow_requires_ac(self):
        with pytest.raises(ValidationError) as exc:
            parse_scenario("[general]\nduration_ms = 10\n[flow]\nmodel = cbr\n")
        assert exc.value.key == "flow[0].ac"

    def test_duplicate_flow_ids(self):
        text = MINIMAL + "\n[flow]\nid = 0\nac = video\n[flow]\nid = 0\nac = video\n"
        with pytest.raises(ValidationError):
            parse_scenario(text)

    def test_bad_policy_token(self):
        with pytest.raises(ValidationError) as exc:
            parse_scenario(MINIMAL + "\n[scheduler]\npolicy = magic\n")
        assert exc.value.key == "scheduler.policy"

    def test_saturated_flow_needs_no_model_params(self):
        scen = parse_scenario(
            "[general]\nduration_ms = 10\n[flow]\nac = video\nsaturated = true\npayload_bytes = 1500\n"
        )
        assert scen.flows[0].saturated


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "scenario.cfg"
    path.write_text(MIXED)
    return path


class TestCli:
    def test_run_writes_csv(self, config_file, tmp_path):
        out = tmp_path / "out.csv"
        code = cli.main(["run", "--config", str(config_file), "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == report.CSV_HEADER
        assert len(lines) == 5  # header + one row per access category
        assert lines[1].startswith("bi,5,voice,")

    def test_missing_config_exits_1(self, tmp_path, capsys):
        code = cli.main(["run", "--config", str(tmp_path / "nope.cfg")])
        assert code == 1
        assert "config error" in capsys.readouterr().err

    def test_invalid_config_exits_1(self, tmp_path, capsys):
        path = tmp_path / "bad.cfg"
        path.write_text(MINIMAL + "\n[phy]\nber = 2.0\n")
        assert cli.main(["run", "--config", str(path)]) == 1
        assert "phy.ber" in capsys.readouterr().err

    def test_deterministic_outputs(self, config_file, tmp_path):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        cli.main(["run", "--config", str(config_file), "--seed", "7", "--out", str(out1)])
        cli.main(["run", "--config", str(config_file), "--seed", "7", "--out", str(out2)])
        assert out1.read_bytes() == out2.read_bytes()

    def test_seed_override_changes_output(self, config_file, tmp_path):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        cli.main(["run", "--config", str(config_file), "--seed", "7", "--out", str(out1)])
        cli.main(["run", "--config", str(config_file), "--seed", "8", "--out", str(out2)])
        a, b = out1.read_text(), out2.read_text()
        assert a != b
        assert ",7," in a and ",8," in b

    def test_scheduler_override(self, config_file, tmp_path):
        out = tmp_path / "out.csv"
        cli.main(["run", "--config", str(config_file), "--scheduler", "fifo", "--out", str(out)])
        assert out.read_text().splitlines()[1].startswith("fifo,")

    def test_compare_emits_three_policies(self, config_file, tmp_path):
        out = tmp_path / "cmp.csv"
        code = cli.main(["run", "--config", str(config_file), "--compare", "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 1 + 3 * 4
        policies = [line.split(",")[0] for line in lines[1:]]
        assert policies == ["bi"] * 4 + ["fifo"] * 4 + ["ampdu-greedy"] * 4

    def test_compare_shares_one_arrival_trace(self, config_file, tmp_path):
        out = tmp_path / "cmp.json"
        cli.main(["run", "--config", str(config_file), "--compare", "--format", "json",
                  "--out", str(out)])
        runs = json.loads(out.read_text())
        assert len(runs) == 3
        generated = [
            {ac: r["per_ac"][ac]["generated"] for ac in r["per_ac"]} for r in runs
        ]
        assert generated[0] == generated[1] == generated[2]

    def test_json_contains_resolved_scenario(self, config_file, tmp_path):
        out = tmp_path / "r.json"
        cli.main(["run", "--config", str(config_file), "--format", "json", "--out", str(out)])
        doc = json.loads(out.read_text())
        assert doc["scenario"]["name"] == "mixed"
        assert doc["scenario"]["phy"]["data_rate_mbps"] == 248.0
        assert doc["scenario"]["scheduler"]["policy"] == "bi"
        assert doc["rng_algorithm"] == "PCG64"
        assert len(doc["scenario"]["flows"]) == 3

    def test_sweep_rows_and_aggregates(self, config_file, tmp_path):
        out = tmp_path / "sweep.csv"
        code = cli.main(
            ["run", "--config", str(config_file), "--duration-ms", "100",
             "--sweep", "seed=0..2", "--out", str(out)]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        # header + 3 seeds x 4 ACs + mean + stddev rows (4 each)
        assert len(lines) == 1 + 12 + 8
        seeds = {line.split(",")[1] for line in lines[1:]}
        assert seeds == {"0", "1", "2", "mean", "stddev"}

    def test_bad_sweep_spec_exits_1(self, config_file, capsys):
        assert cli.main(["run", "--config", str(config_file), "--sweep", "seed=5"]) == 1
        assert "sweep" in capsys.readouterr().err

    def test_runtime_invariant_exits_2(self, config_file, monkeypatch, capsys):
        from aggsim.engine import SimInvariantError

        def boom(*args, **kw):
            raise SimInvariantError("synthetic failure")

        monkeypatch.setattr(cli.engine, "run", boom)
        assert cli.main(["run", "--config", str(config_file)]) == 2
        assert "synthetic failure" in capsys.readouterr().err

    def test_duration_override(self, config_file, tmp_path):
        out = tmp_path / "r.json"
        cli.main(["run", "--config", str(config_file), "--duration-ms", "50",
                  "--format", "json", "--out", str(out)])
        assert json.loads(out.read_text())["duration_us"] == 50_000


def test_load_scenario_roundtrip(tmp_path):
    path = tmp_path / "s.cfg"
    path.write_text(MIXED)
    scen = load_scenario(path)
    assert scen.name == "mixed"
