import pytest

from kacpp.constants import FLAT_RATE_MAX
from kacpp.experiments import ExperimentConfig, run


def test_all_arcs_flat_when_kappa_huge():
    # gamma = n^kappa > n makes every grid point non-smooth, so every event is flat
    cfg = ExperimentConfig(kind="mu-poisson", n=256, M=40, kappa=1.5, N_override="desk", master_seed=3)
    res, _ = run(cfg)
    base, _ = run(ExperimentConfig(kind="mu-poisson", n=256, M=40, N_override="desk", master_seed=3))
    totals = [s["mu_sharp_total"] + s["mu_flat_total"] for s in base.trials]
    assert all(s["mu_sharp_total"] == 0 for s in res.trials)
    assert [s["mu_flat_total"] for s in res.trials] == totals
    assert res.aggregates["mu_flat_rate"] == sum(t > 0 for t in totals) / len(totals)
    assert 0 < res.aggregates["mu_flat_rate"]


@pytest.mark.slow
def test_flat_rate_thresholds_and_decrease():
    rates = {}
    for n in (512, 1024, 2048):
        cfg = ExperimentConfig(kind="mu-poisson", n=n, M=1000, N_override="desk", master_seed=20240108)
        rates[n] = run(cfg, keep_trials=False)[0].aggregates["mu_flat_rate"]
        assert rates[n] <= FLAT_RATE_MAX[n]
    assert rates[512] > rates[1024] > rates[2048]
