from importlib import resources
from math import radians

import numpy as np
import pytest

from musclesim.config import load_muscles, load_scenario, parse_muscles, parse_scenario
from musclesim.errors import ConfigError
from musclesim.rig import RigConfig, moment_arm

DATA = resources.files("musclesim") / "data"


def test_minimal_fatigue_profile_gets_defaults():
    sc = parse_scenario("""
schema: 1
kind: fatigue_profile
duration: 5
load: {type: constant, amplitude: 0.3}
""")
    assert sc.rate == 120.0 and sc.seed == 0
    assert sc.fatigue.init == "fresh" and sc.fatigue.scale == 1.0
    assert sc.fatigue.params().f_coeff == 0.01


def test_square_wave_demo_config():
    sc = load_scenario(DATA / "fatigue_demo.yaml")
    u = sc.load.sample(int(sc.duration * sc.rate), sc.dt)
    assert np.all(u[:2400] == 0.5) and np.all(u[2400:] == 0.0)


def error_for(text):
    with pytest.raises(ConfigError) as err:
        parse_scenario(text, source="s.yaml")
    return err.value


def test_negative_duration_names_field_and_line():
    e = error_for("schema: 1\nkind: fatigue_profile\nduration: -3\nload: {type: constant}\n")
    assert "duration" in str(e) and e.line == 3
    assert str(e).startswith("s.yaml:3:")


def test_unknown_key_fails_closed():
    e = error_for("schema: 1\nkind: curves\ncolour: red\n")
    assert "colour" in str(e) and e.line == 3
    e = error_for("schema: 1\nkind: fatigue_profile\nduration: 1\n"
                  "load: {type: constant, amplitud: 0.2}\n")
    assert "amplitud" in str(e) and e.line == 4


def test_key_not_used_by_kind():
    e = error_for("schema: 1\nkind: curves\nduration: 4\n")
    assert "not used by kind" in str(e)


def test_schema_version_required():
    assert "schema" in str(error_for("kind: curves\n"))
    assert "schema version" in str(error_for("schema: 2\nkind: curves\n"))


def test_parse_error_is_line_addressed():
    e = error_for("schema: 1\nkind: [curves\n")
    assert e.line is not None


def test_non_decreasing_schedule_times():
    e = error_for("""schema: 1
kind: rig_schedule
duration: 2
rig:
  schedule:
    - [0.0, 0.1, -0.5]
    - [1.0, 0.2, -0.5]
    - [0.5, 0.2, -0.5]
""")
    assert "non-decreasing" in str(e) and e.line == 8


def test_window_total_must_match_duration():
    e = error_for("schema: 1\nkind: rig_hold\nduration: 10\nrig: {windows: [{hold: 4}]}\n")
    assert "window total" in str(e)


def test_rig_hold_defaults_and_angles():
    sc = parse_scenario("schema: 1\nkind: rig_hold\nrig: {hold_angle: 30}\n")
    assert sc.rig.hold_angle == pytest.approx(radians(30))
    assert sc.rig.windows[0] == ("hold", 60.0)


def test_overrides():
    sc = load_scenario(DATA / "rig_hold.yaml").with_overrides(seed=4, rate=240, fatigue_scale=5)
    assert (sc.seed, sc.rate, sc.fatigue.scale) == (4, 240.0, 5.0)


def test_bundled_muscles_match_rig_defaults():
    flexor, extensor = load_muscles(DATA / "rig_muscles.yaml")
    cfg = RigConfig()
    for got, ref in ((flexor, cfg.flexor), (extensor, cfg.extensor)):
        assert got.mech == ref.mech and got.gains == ref.gains
        assert got.l_tpose == pytest.approx(ref.l_tpose)
        for theta in (-1.0, 0.0, 1.0):
            assert moment_arm(got, theta, cfg) == pytest.approx(moment_arm(ref, theta, cfg))


def test_muscle_file_errors():
    with pytest.raises(ConfigError) as err:
        parse_muscles("""schema: 1
muscles:
  - name: m
    f_m0: 100
    l_ori: 0.2
    anchors:
      - {bone: 0, offset: [0, 0, 0]}
      - blend:
          - {bone: 0, weight: 0.7, offset: [0, 0, 0]}
          - {bone: 1, weight: 0.7, offset: [0, 0, 0]}
""", source="m.yaml")
    assert "sum to 1" in str(err.value) and err.value.line == 8
    with pytest.raises(ConfigError):
        parse_muscles("schema: 1\nmuscles:\n  - name: m\n    f_m0: 1\n    l_ori: 1\n"
                      "    anchors: [{bone: 0, offset: [0, 0]}, {bone: 1, offset: [1, 0, 0]}]\n")


def test_rig_muscles_file_reference(tmp_path):
    (tmp_path / "m.yaml").write_text((DATA / "rig_muscles.yaml").read_text())
    (tmp_path / "s.yaml").write_text("schema: 1\nkind: rig_hold\nrig: {muscles: m.yaml}\n")
    sc = load_scenario(tmp_path / "s.yaml")
    assert [m.name for m in sc.rig.muscles] == ["flexor", "extensor"]


def test_missing_file():
    with pytest.raises(ConfigError):
        load_scenario("/nonexistent/x.yaml")
