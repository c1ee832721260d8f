import math

import pytest

from dosnet import core, oracle, policies

E = math.e


def _cfg(specs, **kw):
    stations = tuple(
        core.StationSpec(i, radio=core.Radio(rho=rho),
                         policy=core.PolicySpec(name, params or {}))
        for i, (name, rho, params) in enumerate(specs)
    )
    return core.validate_scenario(core.ScenarioConfig(stations=stations, **kw))


def test_probe_flags():
    cfg = _cfg([("ados", 1.0, None), ("csma_ca", 1.0, None),
                ("non_opportunistic", 1.0, None)])
    r = policies.resolve_policies(cfg)
    assert r[0].probes and r[2].probes
    assert not r[1].probes  # blind transmissions only for the CSMA baseline


def test_ados_resolution():
    cfg = _cfg([("ados", 1.0, None)] * 4)
    r = policies.resolve_policies(cfg)
    assert all(rp.adaptive_p for rp in r)
    assert all(rp.thr_mode == policies.THR_CONTROLLER for rp in r)
    assert r[0].p == pytest.approx(0.25)  # min(0.5, 1/N) start
    assert r[0].threshold == 0.0  # fail-safe start: never skip


def test_static_optimal_defaults_to_analytic_solution():
    cfg = _cfg([("static_optimal", 1.0, None)] * 5)
    r = policies.resolve_policies(cfg)
    d = oracle.ShannonExponential(1.0, cfg.bandwidth)
    ana = oracle.solve_static_optimal([d] * 5, 1.0, 10.0)
    for rp, p, thr in zip(r, ana.p, ana.thresholds):
        assert rp.p == pytest.approx(p)
        assert rp.threshold == pytest.approx(thr)
        assert rp.thr_mode == policies.THR_FIXED


def test_tdos_stations_share_one_threshold():
    cfg = _cfg([("tdos", 1.0, None), ("tdos", 3.0, None), ("tdos", 5.0, None)])
    r = policies.resolve_policies(cfg)
    assert r[0].threshold == r[1].threshold == r[2].threshold
    assert r[0].p == pytest.approx(policies.BASELINE_P_FACTOR / 3)


def test_ndos_thresholds_depend_on_own_distribution():
    cfg = _cfg([("ndos", 1.0, None), ("ndos", 4.0, None)])
    r = policies.resolve_policies(cfg)
    assert r[1].threshold > r[0].threshold
    # a station's threshold is the best response at its own success rate
    n = 2
    p = policies.BASELINE_P_FACTOR / n
    own_ps = p * (1 - p)
    d = oracle.ShannonExponential(1.0, cfg.bandwidth)
    assert r[0].threshold == pytest.approx(
        oracle.ndos_threshold(d, own_ps, 1.0, 10.0))


def test_homogeneous_team_thresholds_reduce_to_fixed_point_at_1_over_e():
    n = 5
    p_star = 1 - math.exp(-1 / n)  # produces p_e = 1/e exactly
    cfg = _cfg([("tdos", 1.0, {"p": p_star})] * n)
    r = policies.resolve_policies(cfg)
    d = oracle.ShannonExponential(1.0, cfg.bandwidth)
    p_s = n * p_star * (1 - p_star) ** (n - 1)
    expect = oracle.solve_threshold(d, 1.0, 10.0, success_prob=p_s)
    assert r[0].threshold == pytest.approx(expect, rel=1e-9)


def test_baseline_p_optimized_and_lower_for_csma():
    cfg = _cfg([("non_opportunistic", 1.0, None)] * 5)
    cfg2 = _cfg([("csma_ca", 1.0, None)] * 5)
    r1 = policies.resolve_policies(cfg)
    r2 = policies.resolve_policies(cfg2)
    assert 0 < r2[0].p < r1[0].p < 1
    assert r1[0].threshold == 0.0 and r2[0].threshold == 0.0


def test_static_ados_window_and_initial_threshold():
    cfg = _cfg([("static_ados", 1.0, {"snr_window": 5000})] * 2)
    r = policies.resolve_policies(cfg)
    assert r[0].thr_mode == policies.THR_WINDOW
    assert r[0].snr_window == 5000
    assert r[0].adaptive_p  # the access loop stays adaptive
    d = oracle.ShannonExponential(1.0, cfg.bandwidth)
    assert r[0].threshold == pytest.approx(oracle.solve_threshold(d, 1.0, 10.0))


def test_oracle_tracking_resolution():
    cfg = _cfg([("oracle_tracking", 2.0, None)])
    r = policies.resolve_policies(cfg)
    assert r[0].thr_mode == policies.THR_LOOKUP
    d = oracle.ShannonExponential(2.0, cfg.bandwidth)
    assert r[0].threshold == pytest.approx(oracle.solve_threshold(d, 1.0, 10.0))


def test_active_from_passthrough():
    cfg = _cfg([("ados", 1.0, {"active_from": 1234})])
    assert policies.resolve_policies(cfg)[0].active_from == 1234


def test_on_probe_rule():
    assert policies.on_probe_transmits(1.0, 0.9)
    assert policies.on_probe_transmits(0.9, 0.9)
    assert not policies.on_probe_transmits(0.5, 0.9)
    # a zero rate (below the smallest modulation) never clears a positive
    # threshold
    assert not policies.on_probe_transmits(0.0, 1e-9)
