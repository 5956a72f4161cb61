import numpy as np
import pytest

import etmpc


def test_validate_reports_every_check(surrogate):
    checks = etmpc.validate(surrogate)
    assert len(checks) > 10
    assert all(ok for _, ok, _ in checks)


def test_bad_parameter_is_reported(surrogate):
    surrogate.epsilon = 1.0
    failed = [name for name, ok, _ in etmpc.validate(surrogate) if not ok]
    assert failed == ["epsilon >= 1/mu"]
    with pytest.raises(etmpc.EtmpcError):
        etmpc.run(surrogate, "adaptive")


def test_short_run(surrogate):
    surrogate.steps = 12
    tr = etmpc.run(surrogate, "static")
    assert len(tr) == 12
    assert tr.states.shape == (12, 2)
    assert tr.inputs.shape == (12, 1)
    assert tr.trigger_instants[0] == 0
    assert tr.certified
    assert np.all(np.abs(tr.saturated_inputs) <= 0.4 + 1e-15)
    assert np.all(tr.beta >= -1e-12)
    np.testing.assert_allclose(tr.states[0], [1.2, 0.9])


def test_held_input_matches_gain(surrogate):
    surrogate.steps = 15
    tr = etmpc.run(surrogate, "adaptive")
    gains = {g["k"]: g["F"] for g in tr.gains}
    active = None
    for k in range(len(tr)):
        if k in gains:
            active = k
        np.testing.assert_allclose(tr.inputs[k], gains[active] @ tr.states[active], atol=1e-12)


def test_metrics_dictionary(surrogate):
    surrogate.steps = 10
    m = etmpc.metrics(etmpc.run(surrogate, "periodic"))
    assert m["triggers"] == "10"
    assert m["certified"] == "true"


def test_parse_round_trip(surrogate):
    back = etmpc.parse_scenario(surrogate.to_text())
    assert back.to_text() == surrogate.to_text()
    assert back.modes == ["adaptive", "static", "periodic"]


def test_parse_errors_raise():
    with pytest.raises(etmpc.EtmpcError, match="line"):
        etmpc.parse_scenario("[model]\nn_x = two\n")
