import json

import numpy as np
import pytest

from prespa import cli, config
from prespa.budget import load_budget, save_budget
from prespa.errors import InvalidInput
from prespa.experiments.lifetime import lifetime_experiment


def _meta(out):
    return json.loads((out / "meta.json").read_text())


def test_schema_rejects_unknown_keys(tmp_path):
    with pytest.raises(InvalidInput):
        config.validate({**config.load_defaults("desk"), "bogus": 1})
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"lifetime": {"nonsense": 3}}))
    assert cli.main(["budget", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2


def test_unreadable_config_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["budget", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2


def test_unknown_flag_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main(["budget", "--no-such-flag"])
    assert exc.value.code == 2


def test_defaults_and_hash():
    desk = config.load_defaults("desk")
    measured = config.load_defaults("paper")
    assert config.config_hash(desk) == config.config_hash(json.loads(json.dumps(desk)))
    assert config.config_hash(desk) != config.config_hash(measured)
    assert config.device_params(measured).t1_cavity_us == 520.0


def test_parse_time():
    assert cli.parse_time_us("2000us") == 2000
    assert cli.parse_time_us("2ms") == 2000
    assert cli.parse_time_us("500ns") == 0.5
    assert cli.parse_time_us("25") == 25
    with pytest.raises(InvalidInput):
        cli.parse_time_us("soon")


def test_thread_resolution(monkeypatch):
    args = cli.build_parser().parse_args(["budget"])
    monkeypatch.setenv("PRESPA_SIM_THREADS", "3")
    assert cli.resolve_threads(args, {}) == 3
    args = cli.build_parser().parse_args(["budget", "--threads", "2"])
    assert cli.resolve_threads(args, {}) == 2
    args = cli.build_parser().parse_args(["budget", "--threads", "0"])
    with pytest.raises(InvalidInput):
        cli.resolve_threads(args, {})


def test_budget_command(tmp_path):
    table = tmp_path / "budget_rows.json"
    save_budget(load_budget(), table)
    out = tmp_path / "b"
    assert cli.main(["budget", "--input", str(table), "--out", str(out)]) == 0
    s = _meta(out)["summary"]
    assert s["gamma_long_per_ms"] == pytest.approx(2.9, abs=0.05)
    assert s["gamma_trans_per_ms"] == pytest.approx(3.8, abs=0.05)


def test_validate_command(tmp_path):
    assert cli.main(["validate", "--out", str(tmp_path / "v")]) == 0
    assert _meta(tmp_path / "v")["summary"]["all_passed"]


def _run_lifetime(tmp_path):
    out = tmp_path / "l"
    argv = ["lifetime", "--mode", "ideal-prespa", "--code", "optimal", "--tmax", "2000us", "--out", str(out)]
    assert cli.main(argv) == 0
    return out


def test_lifetime_command(tmp_path):
    out = _run_lifetime(tmp_path)
    summary = _meta(out)["summary"]
    ref = lifetime_experiment("ideal-prespa", np.linspace(0, 2000, 21), code="optimal", dim=9)
    assert summary["process"]["tau_us"] == pytest.approx(ref.tau(), rel=1e-12)
    # the transverse (equator) time is the one quoted as about 5 ms
    assert summary["equator"]["tau_us"] == pytest.approx(5000, rel=0.25)
    lines = (out / "data.csv").read_text().splitlines()
    assert lines[0].startswith("time_us,") and len(lines) == 22


@pytest.mark.xfail(strict=True, reason="optimal words give a process time of 6.8 ms on the 0-2 ms window")
def test_lifetime_command_process_tau_5ms(tmp_path):
    tau = _meta(_run_lifetime(tmp_path))["summary"]["process"]["tau_us"]
    assert tau == pytest.approx(5000, rel=0.25)


def test_metadata_names_figure(tmp_path):
    for cmd in ("budget", "rates"):
        out = tmp_path / cmd
        assert cli.main([cmd, "--out", str(out)]) == 0
        meta = _meta(out)
        assert meta["maps_to"] == cli.FIGURES[cmd]
        assert meta["config_hash"] == config.config_hash(meta["config"])


def test_byte_identical_reruns(tmp_path):
    outs = []
    for k, threads in enumerate((1, 3, 1)):
        out = tmp_path / f"t{k}"
        argv = ["trajectory", "--seed", "7", "--ntraj", "300", "--threads", str(threads), "--out", str(out)]
        assert cli.main(argv) == 0
        outs.append(((out / "data.csv").read_bytes(), (out / "meta.json").read_bytes()))
    assert outs[0] == outs[1] == outs[2]
    assert b"\r" not in outs[0][0]
