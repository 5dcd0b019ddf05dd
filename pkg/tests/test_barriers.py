import math

import numpy as np
import pytest
from scipy.special import ndtr

from rmflab import DomainError
from rmflab.barriers import (
    BarrierSpecG,
    BarrierSpecL,
    WalkConfig,
    ballot_mc,
    ballot_survival,
    discretize_levels,
    discretize_t,
    event_G,
    event_G_many,
    event_L,
    g_fail_prob_mc,
    increment_walk,
    mesh,
    t_grid,
    tilted_expectation,
    tilted_increment_ballot,
)
from rmflab.sampler import sample


def test_ballot_single_step_is_gaussian_cdf():
    for a in (1.0, 2.5):
        est = ballot_mc(WalkConfig(1, 1.0, a), 50_000, seed=1)
        assert abs(est.p - ndtr(a)) < 3 * est.stderr


def test_ballot_counts_nested():
    cfg = WalkConfig(50, 1.0, 2.0)
    counts = ballot_survival(cfg, 20_000, seed=4)
    assert np.all(np.diff(counts) <= 0)
    short = ballot_survival(WalkConfig(20, 1.0, 2.0), 20_000, seed=4)
    assert np.array_equal(short, counts[:20])


def test_ballot_envelope_order():
    est = ballot_mc(WalkConfig(100, 1.0, 1.0), 20_000, seed=2)
    assert 0.05 <= est.p / min(1.0, 1 / math.sqrt(100)) <= 20


def test_walk_config_validation():
    with pytest.raises(DomainError):
        WalkConfig(3, 0.01, 1.0)
    with pytest.raises(DomainError):
        WalkConfig(3, 1.0, 0.5)
    with pytest.raises(DomainError):
        WalkConfig(3, [1.0, 1.0], 1.0)
    with pytest.raises(DomainError):
        WalkConfig(3, 1.0, 1.0, h=lambda j: 100.0)
    with pytest.raises(DomainError):
        ballot_mc(WalkConfig(3, 1.0, 1.0), 10, 0)


def test_mesh_value():
    # log x / e = e^3 at x = e^{e^4}
    x = math.exp(math.exp(4))
    assert mesh(x, 0) == pytest.approx(3 * math.exp(3), rel=1e-12)
    with pytest.raises(DomainError):
        mesh(100.0, 5)


def test_discretize_properties():
    x = math.exp(math.exp(4))
    for t in np.linspace(-0.5, 0.5, 37):
        lv = discretize_levels(t, 2, x)
        prev = t
        for i, u in enumerate(lv):
            m = mesh(x, i)
            assert u <= prev + 1e-12
            assert prev - u < 1 / m + 1e-12
            assert abs(u * m - round(u * m)) < 1e-9
            prev = u
        assert discretize_t(t, 2, x) == lv[-1]
    # grid points are fixed at their own level
    for u in t_grid(x, 0):
        assert discretize_t(u, 0, x) == pytest.approx(u, abs=1e-15)


def test_spec_defaults():
    g = BarrierSpecG(1e8, 11)
    assert g.Cx == pytest.approx(math.log(math.log(11)) + 100 * math.log(math.log(math.log(1e8))))
    assert len(g.levels) == 0
    L = BarrierSpecL(1e8, math.exp(math.exp(1.5)), 8)
    assert L.sigma == pytest.approx(32 / math.log(1e8))
    assert len(L.levels) == 0
    with pytest.raises(DomainError):
        BarrierSpecG(10, 11)
    with pytest.raises(DomainError):
        BarrierSpecL(1e8, 2, 8)


def test_vacuous_and_infinite_barriers_hold():
    s = sample(2000, seed=0)
    assert event_G(s, BarrierSpecG(1e8, 11), 0.1)
    assert event_L(s, BarrierSpecL(1e8, math.exp(math.exp(1.5)), 8), 0.1)
    big = sample(math.floor(1e8 ** math.exp(-1)), seed=0)
    assert event_G(big, BarrierSpecG(1e8, 2, B=0, Cx=math.inf), 0.2)
    assert event_L(big, BarrierSpecL(1e8, 3, 1, B=0, Dx=math.inf), 0.2)


def test_g_event_monotone_in_Cx():
    x = 1e8
    s = sample(math.floor(x ** math.exp(-1)), seed=3)
    grid = t_grid(x, 0)
    tight = event_G_many(s, BarrierSpecG(x, 2, B=0, Cx=-0.5), grid)
    loose = event_G_many(s, BarrierSpecG(x, 2, B=0, Cx=0.5), grid)
    assert np.all(loose >= tight)


def test_g_fail_prob_monotone():
    a = g_fail_prob_mc(BarrierSpecG(1e8, 2, B=0, Cx=-0.5), 100, seed=5)
    b = g_fail_prob_mc(BarrierSpecG(1e8, 2, B=0, Cx=0.5), 100, seed=5)
    assert b.p <= a.p
    assert a.p > 0.3
    assert g_fail_prob_mc(BarrierSpecG(1e8, 11), 100, seed=5).p == 0


def test_tilted_constant_is_one():
    with pytest.warns(RuntimeWarning, match="effective samples"):
        est = tilted_expectation(lambda s: 1.0, 0.0, 1e5, 500, seed=1)
    assert est.value == pytest.approx(1.0, abs=1e-12)
    assert 1 <= est.ess <= 500
    assert est.low_ess == (est.ess < 10)


def test_tilted_mean_of_first_phase():
    # under the tilt, E f(2) = r with r = 2^{-1/2-sigma}: E[f |1 - f r|^{-2}] / E|1 - f r|^{-2} = r
    # x = 10 puts only the prime 2 below x^{1/e}
    est = tilted_expectation(lambda s: s.phases[0].real, 0.0, 10, 4000, seed=2)
    assert not est.low_ess
    assert est.value == pytest.approx(2**-0.5, abs=0.04)


def test_tilted_domain():
    with pytest.raises(DomainError):
        tilted_expectation(lambda s: 1.0, 0.0, 1e5, 100, seed=1)
    with pytest.raises(DomainError):
        tilted_expectation(lambda s: 1.0, 0.5, 1e5, 500, seed=1)


@pytest.mark.filterwarnings("ignore:tilted estimate")
def test_increment_walk_and_tilted_ballot():
    x = 1e8
    s = sample(math.floor(x ** math.exp(-1)), seed=1)
    w = increment_walk(s, x, 2, 1, B=0)
    assert w.shape == (1,)
    with pytest.raises(DomainError):
        increment_walk(s, x, 2, 5, B=0)
    est = tilted_increment_ballot(1e6, 2, 1, 3.0, 500, seed=3, B=0)
    assert 0 <= est.value <= 1
