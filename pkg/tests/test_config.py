import pytest

from thermohaptic.config import (
    AppConfig,
    ServiceConfig,
    build_app_config,
    known_keys,
    load_config,
    parse_clock,
    parse_config_text,
)
from thermohaptic.errors import InvalidInputError


def test_parse_ignores_comments_and_blank_lines() -> None:
    text = """
    # controller tuning
    control.kp = 0.1   # proportional
    limits.max_temp = 49.0

    service.clock = stepped
    """
    values = parse_config_text(text)
    assert values == {
        "control.kp": "0.1",
        "limits.max_temp": "49.0",
        "service.clock": "stepped",
    }


def test_parse_rejects_duplicates_and_malformed_lines() -> None:
    with pytest.raises(InvalidInputError, match="duplicate"):
        parse_config_text("control.kp = 0.1\ncontrol.kp = 0.2\n")
    with pytest.raises(InvalidInputError, match="key = value"):
        parse_config_text("control.kp 0.1\n")
    with pytest.raises(InvalidInputError, match="empty"):
        parse_config_text("control.kp =\n")


def test_defaults_build_without_any_input() -> None:
    app = build_app_config({})
    assert isinstance(app, AppConfig)
    assert app.device.gains.kp == 0.08
    assert app.device.limits.max_temp == 50.0
    assert app.service.udp_port == 9750
    assert app.service.gateway_port == 9751
    assert app.service.clock == "realtime"
    assert app.coupling.spring_stiffness == 1.0


def test_values_reach_their_sections() -> None:
    app = build_app_config(
        {
            "control.kp": "0.11",
            "thermal.ambient_temp": "22.5",
            "policy.max_pressure": "25.0",
            "rates.control_hz": "200",
            "service.udp_port": "0",
            "service.clock": "accel:8",
            "coupling.sphere_radius": "12.0",
        }
    )
    assert app.device.gains.kp == 0.11
    assert app.device.thermal.ambient_temp == 22.5
    assert app.device.policy.max_pressure == 25.0
    assert app.device.control_rate_hz == 200.0
    assert app.service.udp_port == 0
    assert app.service.clock == "accel:8"
    assert app.coupling.sphere_radius == 12.0


def test_unknown_keys_are_rejected_loudly() -> None:
    with pytest.raises(InvalidInputError, match="control.kpp"):
        build_app_config({"control.kpp": "0.1"})
    with pytest.raises(InvalidInputError, match="unknown config keys"):
        build_app_config({"nonsense.key": "1"})


def test_bad_values_name_the_offending_key() -> None:
    with pytest.raises(InvalidInputError, match="control.kp"):
        build_app_config({"control.kp": "fast"})
    with pytest.raises(InvalidInputError, match="control.kp"):
        build_app_config({"control.kp": "inf"})
    with pytest.raises(InvalidInputError, match="service.udp_port"):
        build_app_config({"service.udp_port": "7.5"})


def test_out_of_range_values_fail_downstream_validation() -> None:
    with pytest.raises(InvalidInputError):
        build_app_config({"control.kp": "-1"})
    with pytest.raises(InvalidInputError):
        build_app_config({"service.udp_port": "70000"})
    with pytest.raises(InvalidInputError):
        build_app_config({"rates.sensing_hz": "3"})  # does not divide 100


def test_environment_wins_over_the_file(tmp_path) -> None:
    cfg = tmp_path / "bench.cfg"
    cfg.write_text("control.kp = 0.05\nthermal.ambient_temp = 24.0\n", encoding="utf-8")
    app = load_config(cfg, env={"THERMOHAPTIC_CONTROL_KP": "0.2"})
    assert app.device.gains.kp == 0.2
    assert app.device.thermal.ambient_temp == 24.0


def test_env_names_map_section_then_field() -> None:
    app = load_config(
        None,
        env={
            "THERMOHAPTIC_THERMAL_AMBIENT_TEMP": "21.0",
            "THERMOHAPTIC_SERVICE_GATEWAY_PORT": "0",
            "UNRELATED_VAR": "ignored",
        },
    )
    assert app.device.thermal.ambient_temp == 21.0
    assert app.service.gateway_port == 0


def test_missing_config_file_is_an_error() -> None:
    with pytest.raises(InvalidInputError, match="not found"):
        load_config("/nonexistent/bench.cfg", env={})


def test_clock_grammar() -> None:
    assert parse_clock("realtime") == ("realtime", None)
    assert parse_clock("stepped") == ("stepped", None)
    assert parse_clock("accel:20") == ("accel", 20.0)
    assert parse_clock("accel:0.5") == ("accel", 0.5)
    for bad in ("accel:", "accel:0", "accel:-3", "accel:nan", "warp", ""):
        with pytest.raises(InvalidInputError):
            parse_clock(bad)


def test_service_config_validates_ports() -> None:
    assert ServiceConfig(udp_port=0, gateway_port=0).udp_port == 0
    with pytest.raises(InvalidInputError):
        ServiceConfig(udp_port=-1)
    with pytest.raises(InvalidInputError):
        ServiceConfig(gateway_port=65536)
    with pytest.raises(InvalidInputError):
        ServiceConfig(clock="sometimes")


def test_every_section_field_is_a_known_key() -> None:
    keys = known_keys()
    for expected in (
        "control.kp",
        "control.integral_limit",
        "limits.max_temp",
        "policy.hold_pressure",
        "pneumatic.pressure_time_constant",
        "thermistor.beta",
        "thermal.heater_max_power",
        "coupling.spring_damping",
        "rates.telemetry_hz",
        "service.clock",
    ):
        assert expected in keys
    assert all("." in k for k in keys)
    assert len(keys) >= 30
