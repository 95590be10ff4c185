import json
import math
from pathlib import Path

import pytest

from spaceform_areas.cli import (
    ConfigParseError,
    ExperimentSpec,
    UnknownKeyError,
    _coerce_override,
    main,
    parse_config,
    run_experiment,
)


class TestParseConfig:
    def test_minimal_document_uses_defaults(self):
        spec = parse_config('{"experiment": "levy-baseline"}')
        assert spec.name == "levy-baseline"
        assert spec.params == {}
        assert spec.output_dir == Path("out")
        assert spec.master_seed == 12345
        assert spec.resolved_params()["paths"] == 100000

    def test_full_document(self):
        spec = parse_config(json.dumps({
            "experiment": "winding-cp1",
            "params": {"paths": 500, "t": 5.0},
            "output_dir": "results/w",
            "master_seed": 99,
        }))
        assert spec.master_seed == 99
        assert spec.output_dir == Path("results/w")
        assert spec.resolved_params()["paths"] == 500
        assert spec.resolved_params()["lam"] == 1.0

    def test_unknown_top_level_key_named(self):
        with pytest.raises(UnknownKeyError, match="pahts"):
            parse_config('{"experiment": "levy-baseline", "pahts": 3}')

    def test_unknown_param_key_named(self):
        with pytest.raises(UnknownKeyError, match="pths"):
            parse_config(
                '{"experiment": "levy-baseline", "params": {"pths": 3}}')

    def test_unknown_experiment(self):
        with pytest.raises(UnknownKeyError, match="no-such"):
            parse_config('{"experiment": "no-such"}')

    def test_parse_error_carries_line_and_column(self):
        with pytest.raises(ConfigParseError, match=r"line 2, column"):
            parse_config('{"experiment":\n "levy-baseline",}')

    def test_empty_document(self):
        with pytest.raises(ConfigParseError):
            parse_config("   ")

    def test_non_object_document(self):
        with pytest.raises(ConfigParseError):
            parse_config("[1, 2]")

    def test_missing_experiment(self):
        with pytest.raises(ConfigParseError):
            parse_config('{"master_seed": 4}')


class TestOverrides:
    def test_coercion(self):
        assert _coerce_override("3") == 3
        assert _coerce_override("2.5") == 2.5
        assert _coerce_override("true") is True
        assert _coerce_override("[0.5, 1.0]") == [0.5, 1.0]
        assert _coerce_override("hello") == "hello"


class TestRunExperiment:
    def test_artifacts_and_manifest_schema(self, tmp_path):
        spec = ExperimentSpec(
            name="levy-baseline",
            params={"paths": 4096, "dt": 5e-3},
            output_dir=tmp_path, master_seed=7)
        bundle = run_experiment(spec, threads=1)
        man = json.loads((tmp_path / "manifest.json").read_text())
        assert man["schema_version"] == 1
        assert man["experiment"] == "levy-baseline"
        assert man["master_seed"] == 7
        assert man["threads"] == 1
        assert man["wall_time_s"] > 0
        assert isinstance(man["passed"], bool)
        for c in man["checks"]:
            assert set(c) == {"name", "value", "threshold", "verdict"}
            assert c["verdict"] in ("pass", "fail")
        assert bundle.manifest["checks"] == man["checks"]
        csvs = sorted(tmp_path.glob("*.csv"))
        assert csvs, "experiment should emit at least one CSV table"

    def test_csv_format(self, tmp_path):
        spec = ExperimentSpec(
            name="levy-baseline",
            params={"paths": 4096, "dt": 5e-3},
            output_dir=tmp_path, master_seed=7)
        run_experiment(spec)
        raw = next(iter(sorted(tmp_path.glob("*.csv")))).read_bytes()
        assert b"\r" not in raw
        lines = raw.decode().splitlines()
        assert len(lines) >= 2
        # float cells carry 17 significant digits (shortest round-trip repr
        # via '%.17g' never loses bits)
        for cell in lines[1].split(","):
            if "." in cell or "e" in cell:
                assert float(cell) == float(format(float(cell), ".17g"))

    def test_failure_recorded_not_raised(self, tmp_path):
        spec = ExperimentSpec(
            name="ch1-loop-density", params={"t": -1.0},
            output_dir=tmp_path, master_seed=1)
        bundle = run_experiment(spec)
        assert not bundle.passed
        man = json.loads((tmp_path / "manifest.json").read_text())
        assert "error" in man
        assert man["passed"] is False

    def test_rerun_byte_identical_across_threads(self, tmp_path):
        base = {"paths": 8192, "dt": 5e-3}
        outs = []
        for threads, sub in ((1, "a"), (3, "b")):
            spec = ExperimentSpec(
                name="levy-baseline", params=base,
                output_dir=tmp_path / sub, master_seed=33)
            run_experiment(spec, threads=threads)
            outs.append({p.name: p.read_bytes()
                         for p in sorted((tmp_path / sub).glob("*.csv"))})
        assert outs[0] == outs[1]


class TestMain:
    def test_exit_zero_on_pass(self, tmp_path, capsys):
        rc = main(["--experiment", "jacobi-selftest",
                   "--out", str(tmp_path), "--seed", "3"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "[PASS]" in out

    def test_exit_one_on_numeric_failure(self, tmp_path, capsys):
        # an impossible tolerance forces a clean numeric failure
        rc = main(["--experiment", "jacobi-selftest",
                   "--out", str(tmp_path),
                   "--override", "oracle_tol=1e-30"])
        out = capsys.readouterr().out
        assert rc == 1
        assert "[FAIL]" in out

    def test_exit_two_on_config_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"experiment": "levy-baseline",}')
        assert main(["--config", str(bad)]) == 2
        with pytest.raises(SystemExit):  # argparse usage error
            main([])

    def test_exit_two_on_unknown_experiment(self, capsys):
        assert main(["--experiment", "nope"]) == 2

    def test_config_plus_flag_overrides(self, tmp_path, capsys):
        cfgp = tmp_path / "c.json"
        cfgp.write_text(json.dumps({
            "experiment": "levy-baseline",
            "params": {"paths": 4096, "dt": 5e-3},
            "master_seed": 5,
        }))
        rc = main(["--config", str(cfgp), "--out", str(tmp_path / "o"),
                   "--seed", "11", "--override", "lam=0.5"])
        assert rc == 0
        man = json.loads((tmp_path / "o" / "manifest.json").read_text())
        assert man["master_seed"] == 11
        assert man["config"]["lam"] == 0.5
        assert man["config"]["paths"] == 4096
