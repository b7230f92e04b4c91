import math

from udn_meanfield import cli, validation
from udn_meanfield.channel import FadingParams
from udn_meanfield.meanfield import NetworkConfig


def test_bundle_runs():
    checks = {c.name: c for c in validation.run_all(trials=600, seed=3)}
    assert checks["Lambert W identity"].passed
    assert checks["Gumbel mean vs closed form"].passed
    assert checks["FPK residual refinement ratio"].passed
    assert all(isinstance(c.value, float) for c in checks.values())


def test_interference_checks_tell_forms_apart():
    cfg = NetworkConfig(100.0, 1.0, R=10.0)
    assert validation.interference_check(cfg, 500, 1, "campbell").passed
    assert not validation.interference_check(cfg, 500, 1, "closed").passed


def test_ou_check():
    assert validation.ou_moment_check(FadingParams.from_norm(math.sqrt(2), 1.0), 1.0, 20_000, 5, em_dt=1e-2).passed


def test_validate_preset_prints_table(tmp_path, capsys):
    out = tmp_path / "v.csv"
    assert cli.main(["validate", "--trials", "600", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "PASS  Lambert W identity" in text and "FAIL  MC interference vs closed form" in text
    assert out.read_text().splitlines()[1] == "check,value,target,passed"
