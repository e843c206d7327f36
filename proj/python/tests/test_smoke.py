import json
import math

import numpy as np
import pytest

import kslab


def test_version_and_ids():
    assert kslab.__version__ == "1.0.0"
    assert "lp-frame" in kslab.check_ids()


def test_zero_field_norms():
    g = kslab.GridSpec(2, 32, 2 * math.pi)
    z = kslab.Field.zeros(g)
    assert kslab.lebesgue_norm(z, 2.0) == 0.0
    assert kslab.besov_norm(z, -1.5, 4.0, 1.0) == 0.0


def test_round_trip_and_single_mode_shell():
    g = kslab.GridSpec(2, 64, 2 * math.pi)
    x = np.arange(64) * 2 * math.pi / 64
    samples = np.cos(11 * x)[:, None] * np.ones((1, 64))
    f = kslab.Field.from_samples(g, samples)
    assert np.allclose(f.samples(), samples, atol=1e-12)
    # |xi| = 11 lies on the plateau of shell 3 (32/3 <= 11 <= 12), so only that shell carries energy.
    e = kslab.shell_energy(f)
    total = sum(e.values())
    assert e[3] / total > 1 - 1e-12
    # L^2 of cos on the torus is sqrt(area / 2).
    assert kslab.lebesgue_norm(f, 2.0) == pytest.approx(math.sqrt((2 * math.pi) ** 2 / 2), rel=1e-12)


def test_theta_hat_profile():
    spec = kslab.AtomSpec()
    assert kslab.theta_hat(spec, 0.0) == 1.0
    assert kslab.theta_hat(spec, 2 * spec.beta) == 0.0


def test_constraint_violation_reported():
    p = kslab.ConstructionParams()
    p.r = 2.0
    msgs = p.violations(kslab.AtomSpec())
    assert any("r < d" in m for m in msgs)


def test_config_validation():
    assert kslab.validate_config(kslab.default_config()) == []
    bad = json.dumps({"construction": {"r": 2}})
    assert any("requires 1 <= r < d" in m for m in kslab.validate_config(bad))


def test_solver_zero_data():
    g = kslab.GridSpec(2, 16, 2 * math.pi)
    z = kslab.Field.zeros(g)
    v0 = kslab.Field.from_samples(g, np.zeros((16, 16)))
    with pytest.raises(kslab.KslabError):
        kslab.solve(z, v0, 0.1)  # v0 must be a vector field


def test_fast_check_passes():
    rep = kslab.run_check("duhamel", seed=12, corpus_size=4)
    assert rep["passed"], rep["first_failure"]
