import pytest

from levymem.config import ExperimentConfig, load, loads, profile_function
from levymem.errors import ConfigError
from levymem.grid import Grid

GOOD = """\
domain: {a: -1.0, b: 1.0, n: 32}
time: {T: 0.5, steps: 8}
kernel:
  family: fractional
  s: 0.5
potential: {profile: quadratic, c: 1.0}
"""


def test_defaults_when_sections_are_missing():
    cfg = loads("")
    assert cfg == ExperimentConfig()
    assert cfg.forcing.profile == "constant" and cfg.weight.profile == "zero"


def test_good_config_round_trips():
    cfg = loads(GOOD)
    assert cfg.domain.n == 32 and cfg.kernel.s == 0.5
    assert cfg.build_grid().n == 32
    assert cfg.build_time().steps == 8
    assert cfg.echo()["kernel"]["s"] == 0.5


def test_fractional_order_out_of_range_names_field_and_line():
    with pytest.raises(ConfigError) as info:
        loads(GOOD.replace("s: 0.5", "s: 1.5"))
    err = info.value
    assert err.key == "kernel.s" and err.line == 5
    assert "kernel.s" in str(err) and "line 5" in str(err)


@pytest.mark.parametrize("text, key", [
    (GOOD + "solver: {damping: 0}\n", "solver.damping"),
    (GOOD + "solver: {theta: 0.3}\n", "solver.theta"),
    (GOOD + "solver: {tol: -1}\n", "solver.tol"),
    (GOOD.replace("n: 32", "n: 2.5"), "domain.n"),
    (GOOD.replace("a: -1.0", "a: 2.0"), "domain.b"),
    (GOOD.replace("quadratic", "cubic"), "potential.profile"),
    (GOOD + "initial: {profile: square}\n", "initial.profile"),
    (GOOD + "weight: {profile: constant, amplitude: -1}\n", "weight.amplitude"),
    (GOOD.replace("family: fractional", "family: general\n  profile: nope"), "kernel.profile"),
    (GOOD + "kernel_extra: 1\n", "kernel_extra"),
    (GOOD.replace("  s: 0.5", "  s: 0.5\n  order: 2"), "kernel.order"),
    (GOOD + "study: {s_list: [0.5, 1.2]}\n", "study.s_list"),
    (GOOD + "study: {eps_list: [0.0]}\n", "study.eps_list"),
])
def test_invalid_values_name_their_key(text, key):
    with pytest.raises(ConfigError) as info:
        loads(text)
    assert info.value.key == key
    assert info.value.line is not None


def test_general_kernel_parameters_are_checked():
    text = GOOD.replace("family: fractional", "family: general\n  profile: tempered\n  params: {s: 0.5, lam: -1}")
    with pytest.raises(ConfigError) as info:
        loads(text)
    assert info.value.key == "kernel.params"


def test_yaml_syntax_error_reports_line():
    with pytest.raises(ConfigError) as info:
        loads("domain: {a: -1.0\ntime: [1, 2\n")
    assert info.value.line is not None


def test_top_level_must_be_mapping():
    with pytest.raises(ConfigError):
        loads("- 1\n- 2\n")


def test_load_from_file(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(GOOD)
    assert load(path).domain.n == 32


@pytest.mark.parametrize("name", ["sine", "bump", "constant", "zero"])
def test_profiles_are_bounded_by_amplitude(name):
    from levymem.config import ProfileCfg
    g = Grid(-1.0, 1.0, 41)
    vals = profile_function(g, ProfileCfg(name, 2.0)).values
    assert vals.max() <= 2.0 + 1e-15 and vals.min() >= 0
