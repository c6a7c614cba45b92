import json
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from zscan.cmos import (
    BaselineNetwork,
    CapacitanceParams,
    GateBranch,
    MosfetParams,
    Polarity,
    branch_from_devices,
    gate_impedance,
    network_impedance,
    parasitic_capacitance,
    r_effective,
    r_linear,
    r_saturation,
)
from zscan.errors import ConfigError, SubthresholdBias
from zscan.rf import feature_matrix, impedance_to_reflection
from zscan.synth import (
    ActivityProfile,
    GridSpec,
    SimulatorConfig,
    draw_observation,
    synthesize_dataset,
)

NOMINAL = MosfetParams(k_prime=100e-6, aspect_ratio=10, v_threshold=0.5, v_drain=1.5)


def test_r_linear_example():
    assert r_linear(NOMINAL) == pytest.approx((0.5 * 1.0) / (0.375 * 1e-3 * 1.0), rel=1e-12)
    assert r_linear(NOMINAL) == pytest.approx(1333.3333333333333, rel=1e-12)


def test_r_saturation_example():
    assert r_saturation(NOMINAL) == pytest.approx(3000.0, rel=1e-12)


def test_r_effective_examples():
    assert r_effective(100, 300) == 200
    assert r_effective(7.5, 7.5) == 7.5
    assert r_effective(r_linear(NOMINAL), r_saturation(NOMINAL)) == pytest.approx(
        6500.0 / 3.0, rel=1e-12)


def test_subthreshold():
    p = replace(NOMINAL, v_drain=0.5)
    with pytest.raises(SubthresholdBias):
        r_linear(p)
    with pytest.raises(SubthresholdBias):
        r_saturation(p)


def test_scaling_symmetries():
    assert r_linear(replace(NOMINAL, aspect_ratio=20)) == pytest.approx(r_linear(NOMINAL) / 2)
    assert r_saturation(replace(NOMINAL, k_prime=200e-6)) == pytest.approx(
        r_saturation(NOMINAL) / 2)


def test_pmos_uses_magnitudes():
    p = MosfetParams(100e-6, 10, -0.5, v_drain=0.0, v_source=1.5, polarity=Polarity.PMOS)
    assert r_linear(p) == pytest.approx(r_linear(NOMINAL))
    assert r_saturation(p) == pytest.approx(r_saturation(NOMINAL))


@given(st.floats(1e-6, 1e-3), st.floats(0.5, 50), st.floats(1.01, 3.0), st.floats(0.1, 0.9))
def test_monotone_in_k_and_aspect(k, wl, vds, vt):
    p = MosfetParams(k, wl, vt, vds)
    for q in (replace(p, k_prime=k * 1.5), replace(p, aspect_ratio=wl * 1.5)):
        assert r_linear(q) < r_linear(p)
        assert r_saturation(q) < r_saturation(p)
    rl, rs = r_linear(p), r_saturation(p)
    assert min(rl, rs) <= r_effective(rl, rs) <= max(rl, rs)


def test_parasitic_capacitance_examples():
    c = parasitic_capacitance(CapacitanceParams(c_overlap=1e-15 / 1e-6, width=2e-6))
    assert c["c_gd"] == pytest.approx(4e-15, rel=1e-12)
    zero = parasitic_capacitance(CapacitanceParams())
    assert zero == {"c_gd": 0.0, "c_db": 0.0, "c_total": 0.0}
    c = parasitic_capacitance(CapacitanceParams(k_bottom=1, area_drain=1e-12, cj_bottom=1e-3))
    assert c["c_db"] == pytest.approx(1e-15, rel=1e-12)
    full = CapacitanceParams(1e-9, 2e-6, 0.5, 1e-12, 1e-3, 0.5, 4e-6, 2e-10, 3e-15)
    c = parasitic_capacitance(full)
    assert c["c_total"] == pytest.approx(4e-15 + (0.5e-15 + 0.4e-15) + 3e-15, rel=1e-12)
    with pytest.raises(ValueError):
        CapacitanceParams(width=-1)


def test_gate_impedance_examples():
    b = GateBranch(200.0, 1e-12)
    assert gate_impedance(b, 1e9) == pytest.approx(200 - 1000j, rel=1e-12)
    big_c = GateBranch(200.0, 1e-11)
    assert abs(gate_impedance(big_c, 1e15).imag) <= 1e-6 * 200
    assert abs(gate_impedance(b, 1e18).imag) <= 1e-6 * 200
    half = GateBranch(200.0, 0.5e-12)
    assert gate_impedance(half, 1e9).imag == pytest.approx(2 * gate_impedance(b, 1e9).imag)


def test_branch_from_devices():
    caps = CapacitanceParams(c_overlap=1e-9, width=2e-6)
    b = branch_from_devices(NOMINAL, caps, n_parallel=4)
    assert b.r_eff == pytest.approx(6500.0 / 3.0 / 4)
    assert b.c_eq == pytest.approx(16e-15)


def test_network_impedance_examples():
    w = 1e9
    assert network_impedance(BaselineNetwork(3.0, 2e-9, 0.0), [], w) == pytest.approx(3 + 2j)
    z = 40 - 30j
    br = GateBranch(40.0, 1 / (30 * w))
    assert network_impedance(BaselineNetwork(), [br, br], w) == pytest.approx(z / 2)
    one = network_impedance(BaselineNetwork(1.0, 0.0, 0.0), [GateBranch(200.0, 1e-12)], w)
    assert one == pytest.approx(201 - 1000j, rel=1e-12)
    shunt_only = network_impedance(BaselineNetwork(0, 0, 1e-12), [], w)
    assert shunt_only == pytest.approx(-1000j)


def small_cfg(**kw):
    base = dict(grid=GridSpec(1e6, 3e9, 64), observations_per_class=6, seed=7)
    base.update(kw)
    return SimulatorConfig(**base)


def test_default_config_matches_corpus_shape():
    cfg = SimulatorConfig()
    assert cfg.grid.n_points == 10_000
    assert (cfg.grid.start_hz, cfg.grid.stop_hz) == (500e3, 4e9)
    assert cfg.observations_per_class == 445 and len(cfg.profiles) == 4
    assert cfg.z_ref == 50.0
    f = cfg.grid.frequencies()
    assert f[0] == 500e3 and f[-1] == 4e9 and f.size == 10_000


def test_synthesis_deterministic():
    a = synthesize_dataset(small_cfg())
    b = synthesize_dataset(small_cfg())
    assert np.array_equal(a.gamma, b.gamma) and a.labels.tolist() == b.labels.tolist()
    c = synthesize_dataset(small_cfg(seed=8))
    assert not np.array_equal(a.gamma, c.gamma)
    assert a.counts == {p.class_name: 6 for p in small_cfg().profiles}


def test_observation_stream_independent_of_corpus_size():
    a = synthesize_dataset(small_cfg(observations_per_class=3))
    b = synthesize_dataset(small_cfg(observations_per_class=6))
    assert np.array_equal(a.gamma[:3], b.gamma[:3])


def test_noise_free_single_branch_matches_formula():
    prof = ActivityProfile("one", 1, 0, (120.0, 120.0), (2e-12, 2e-12), 0.0)
    cfg = small_cfg(profiles=(prof,), noise_sigma=0.0, observations_per_class=2)
    ds = synthesize_dataset(cfg)
    f = cfg.grid.frequencies()
    z = [network_impedance(cfg.baseline, [GateBranch(120.0, 2e-12)], 2 * np.pi * fk) for fk in f]
    expected = [(zk - 50) / (zk + 50) for zk in z]
    assert np.allclose(ds.gamma[0], expected, rtol=1e-12, atol=1e-15)
    assert np.allclose(ds.gamma[1], expected, rtol=1e-12, atol=1e-15)


def test_noise_free_synthesis_is_passive():
    ds = synthesize_dataset(small_cfg(noise_sigma=0.0))
    assert np.abs(ds.gamma).max() < 1.0


def test_noise_statistics():
    cfg = small_cfg(noise_sigma=0.05, grid=GridSpec(1e6, 3e9, 4000), observations_per_class=1)
    omega = 2 * np.pi * cfg.grid.frequencies()
    z, gamma = draw_observation(cfg, 0, 0, omega)
    resid = gamma - impedance_to_reflection(z, 50.0)
    assert np.mean(np.abs(resid) ** 2) == pytest.approx(0.05 ** 2, rel=0.1)


def test_default_profiles_separable_without_noise():
    cfg = SimulatorConfig(noise_sigma=0.0, observations_per_class=150,
                          grid=GridSpec(500e3, 4e9, 1000))
    ds = synthesize_dataset(cfg)
    X, y = feature_matrix(ds), ds.label_indices()
    for a in range(4):
        for b in range(a + 1, 4):
            gap = np.abs(X[y == a].mean(0) - X[y == b].mean(0))
            spread = np.maximum(X[y == a].std(0, ddof=1), X[y == b].std(0, ddof=1))
            assert np.max(gap / spread) > 10, (a, b)


@pytest.mark.parametrize("bad", [
    {"grid": {"start_hz": 5e9, "stop_hz": 1e9}},
    {"grid": {"n_points": 1}},
    {"noise_sigma": -1},
    {"observations_per_class": 0},
    {"seed": -3},
    {"profiles": []},
    {"profiles": [{"class_name": "a", "n_gates_mean": 0}]},
    {"profiles": [{"class_name": "a", "n_gates_mean": 2, "r_eff_range": [5, 1]}]},
    {"bogus": 1},
    {"grid": {"points": 4}},
])
def test_config_errors(bad):
    with pytest.raises(ConfigError):
        SimulatorConfig.from_dict(bad)


def test_config_json_round_trip():
    cfg = SimulatorConfig()
    assert SimulatorConfig.from_json(cfg.to_json()) == cfg
    partial = SimulatorConfig.from_json(json.dumps({"seed": 4, "grid": {"n_points": 50}}))
    assert partial.seed == 4 and partial.grid.n_points == 50
    assert partial.grid.start_hz == 500e3 and partial.profiles == cfg.profiles
    with pytest.raises(ConfigError):
        SimulatorConfig.from_json("{not json")
