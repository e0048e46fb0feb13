import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kacpp.sampler import CoefficientLaw, SeedSpec, draw_coefficients, make_bitgen, make_rng

LAWS = ["gaussian", "rademacher", "uniform"]


@pytest.mark.parametrize("name", LAWS)
def test_builtin_laws_are_normalized(name):
    law = CoefficientLaw(name)
    x = law.sample(make_rng(SeedSpec(5)), 400_000)
    assert abs(x.mean()) < 5 / math.sqrt(x.size)
    # variance about the known mean 0; spread of x^2 is sqrt(E x^4 - 1)
    assert abs(np.mean(x**2) - 1) <= 5 * math.sqrt(law.fourth_moment - 1) / math.sqrt(x.size) + 1e-12


def test_fourth_moments():
    assert CoefficientLaw("gaussian").fourth_moment == 3
    assert CoefficientLaw("rademacher").fourth_moment == 1
    assert CoefficientLaw("uniform").fourth_moment == pytest.approx(9 / 5)


def test_rademacher_entries():
    xi = draw_coefficients(CoefficientLaw("rademacher"), 1000, SeedSpec(3, 8))
    assert set(np.unique(xi)) == {-1.0, 1.0}


def test_gaussian_large_draw():
    n = 100_000
    xi = draw_coefficients(CoefficientLaw("gaussian"), n, SeedSpec(1))
    assert abs(xi.mean()) <= 5 / math.sqrt(n)
    assert abs(xi.var() - 1) <= 5 * math.sqrt(2 / n)


def test_determinism_and_stream_disjointness():
    law = CoefficientLaw("gaussian")
    a = draw_coefficients(law, 50, SeedSpec(7, 3))
    assert np.array_equal(a, draw_coefficients(law, 50, SeedSpec(7, 3)))
    assert not np.array_equal(a, draw_coefficients(law, 50, SeedSpec(7, 4)))
    assert not np.array_equal(a, draw_coefficients(law, 50, SeedSpec(8, 3)))


def test_trial_blocks_do_not_overlap():
    # the trial index lives in the top counter word, so a trial would need 2^192 draws to reach the next
    bg = make_bitgen(SeedSpec(7, 5))
    st0 = bg.state["state"]
    assert list(st0["key"]) == [7, 0]
    assert list(st0["counter"]) == [0, 0, 0, 5]


@pytest.mark.parametrize("values,probs", [
    ((-1.0, 1.0), (0.5, 0.5)),
    ((-2.0, 0.0, 2.0), (0.125, 0.75, 0.125)),
])
def test_discrete_valid(values, probs):
    law = CoefficientLaw("discrete", values, probs)
    x = law.sample(make_rng(SeedSpec(2)), 1000)
    assert set(np.unique(x)) <= set(values)


@pytest.mark.parametrize("values,probs", [
    ((1.0,), (1.0,)),                      # degenerate
    ((-1.0, 1.0), (0.4, 0.4)),             # probabilities do not sum to 1
    ((0.0, 2.0), (0.75, 0.25)),            # nonzero mean
    ((-2.0, 2.0), (0.5, 0.5)),             # variance 4
])
def test_discrete_invalid(values, probs):
    with pytest.raises(ValueError):
        CoefficientLaw("discrete", values, probs)


def test_seed_range_and_degree():
    with pytest.raises(ValueError):
        SeedSpec(-1)
    with pytest.raises(ValueError):
        SeedSpec(0, 2**64)
    with pytest.raises(ValueError):
        draw_coefficients(CoefficientLaw("gaussian"), 0, SeedSpec(0))
    with pytest.raises(ValueError):
        CoefficientLaw("cauchy")


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), trial=st.integers(0, 2**64 - 1), n=st.integers(1, 300))
def test_length_and_repeatability(seed, trial, n):
    law = CoefficientLaw("uniform")
    a = draw_coefficients(law, n, SeedSpec(seed, trial))
    assert a.shape == (n + 1,)
    assert np.all(np.abs(a) <= math.sqrt(3))
    assert np.array_equal(a, draw_coefficients(law, n, SeedSpec(seed, trial)))
