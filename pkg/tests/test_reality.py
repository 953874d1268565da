import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skeptic import (AdversarialMinimizer, BiasedCoin, ConstantBias, FairCoin, LinearOperatorSpec,
                     PastAverage, RatePath, UniformNoise, VectorUnitBall, run_game)
from skeptic.analysis import rate_statistic
from skeptic.game import update_average, validate_move
from skeptic.reality import rate_path_move, rate_target

ROUNDS = 1_000_000


def play(spec, rounds, seed=0, bets=None, dim=None):
    player = spec.build(np.random.default_rng(seed), dim)
    if bets is None:
        bets = np.zeros(rounds) if dim is None else np.zeros((rounds, dim))
    return [player.move(bets[n - 1], n) for n in range(1, rounds + 1)]


def test_fair_coin_stream():
    xs = np.array(play(FairCoin(), 20_000, seed=1))
    assert set(np.unique(xs)) == {-1.0, 1.0}
    assert abs(xs.mean()) < 4 / math.sqrt(len(xs))


def test_biased_coin_mean():
    xs = np.array(play(BiasedCoin(0.6), 50_000, seed=2))
    assert xs.mean() == pytest.approx(0.2, abs=4 * math.sqrt(0.96 / 50_000))


def test_constant_bias():
    traj = run_game(PastAverage(0.5), ConstantBias(0.2), 50)
    assert np.all(traj.x == 0.2)
    np.testing.assert_allclose(traj.xbar, 0.2, rtol=1e-15)


def test_adversary_sign_rule():
    player = AdversarialMinimizer(1.0).build()
    assert player.move(0.3, 1) == -1.0
    assert 0.3 * player.move(0.3, 1) == -0.3
    assert player.move(-0.2, 2) == 1.0
    assert player.move(0.0, 3) == 0.0
    assert AdversarialMinimizer(0.4).build().move(5.0, 1) == -0.4


def test_vector_adversary():
    player = AdversarialMinimizer(1.0).build(None, 3)
    x = player.move(np.array([0.3, -0.4, 0.0]), 1)
    np.testing.assert_allclose(x, [-0.6, 0.8, 0.0])
    assert np.linalg.norm(x) <= 1.0
    np.testing.assert_array_equal(player.move(np.zeros(3), 2), np.zeros(3))


def test_rate_path_examples():
    assert rate_path_move(1.0, 1, 0.0) == 0.0
    assert rate_path_move(1.0, 2, 0.0) == 0.0
    # 3 sqrt(ln 3 / 3) = 1.8154... is clamped
    assert 3 * math.sqrt(math.log(3) / 3) == pytest.approx(1.8154, abs=1e-4)
    assert rate_path_move(1.0, 3, 0.0) == 1.0


def test_rate_path_statistic_at_one_million():
    traj = run_game(PastAverage(0.5), RatePath(1.2), ROUNDS, record_every=1000)
    assert rate_statistic(int(traj.n[-1]), traj.xbar[-1]) == pytest.approx(1.2, abs=0.01)


@pytest.mark.parametrize("a", [0.5, 0.8, 1.0, 1.2, 1.5])
def test_rate_path_tracking(a):
    avg, worst, last_clamped = 0.0, 0.0, 0
    for n in range(1, 200_001):
        raw = n * rate_target(a, n) - (n - 1) * avg
        x = rate_path_move(a, n, avg)
        if x != raw:
            last_clamped = n
        avg = update_average(avg, n, x)
        if n >= 10_000:
            worst = max(worst, abs(math.sqrt(n) * abs(avg) / math.sqrt(math.log(n)) - a))
    assert worst <= 0.01
    # the clamp only acts during the catch-up right after n_start
    assert last_clamped < 20


@pytest.mark.parametrize("spec", [FairCoin(), BiasedCoin(0.3), UniformNoise(), ConstantBias(-1.0),
                                  RatePath(1.5), RatePath(0.5)])
def test_bound_compliance_million_rounds(spec):
    xs = np.array(play(spec, ROUNDS, seed=3))
    assert np.all(np.abs(xs) <= 1.0)


def test_adversary_bound_compliance_million_rounds():
    bets = np.random.default_rng(0).standard_normal(ROUNDS)
    xs = np.array(play(AdversarialMinimizer(1.0), ROUNDS, bets=bets))
    assert np.all(np.abs(xs) <= 1.0)
    assert np.all(bets * xs <= 0)


@pytest.mark.parametrize("inner", [FairCoin(), UniformNoise(), ConstantBias(1.0), RatePath(1.5),
                                   AdversarialMinimizer(1.0)])
@pytest.mark.parametrize("direction", ["fixed", "rotating", "random"])
def test_vector_moves_in_unit_ball(inner, direction):
    rng = np.random.default_rng(1)
    bets = rng.standard_normal((5000, 4))
    xs = play(VectorUnitBall(inner, direction, period=7), 5000, bets=bets, dim=4)
    for n, x in enumerate(xs, 1):
        validate_move(x, n)


@pytest.mark.parametrize("strategy", [PastAverage(0.5), PastAverage(0.1)])
@pytest.mark.parametrize("magnitude", [1.0, 0.5])
def test_adversary_never_lets_capital_grow(strategy, magnitude):
    traj = run_game(strategy, AdversarialMinimizer(magnitude), 5000)
    assert np.all(traj.bet * traj.x <= 0)
    assert np.all(traj.capital <= 1.0)


def test_adversary_against_vector_strategy():
    op = LinearOperatorSpec(np.diag([0.1, 0.3, 0.5]))
    traj = run_game(op, VectorUnitBall(AdversarialMinimizer(1.0)), 2000)
    assert np.all(np.sum(traj.bet * traj.x, axis=1) <= 0)
    assert np.all(traj.capital <= 1.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**63 - 1),
       st.sampled_from([FairCoin(), BiasedCoin(0.8), UniformNoise(),
                        VectorUnitBall(UniformNoise(), "random")]))
def test_seeded_reproducibility(seed, spec):
    dim = 3 if isinstance(spec, VectorUnitBall) else None
    a = np.array(play(spec, 5000, seed=seed, dim=dim))
    b = np.array(play(spec, 5000, seed=seed, dim=dim))
    assert np.array_equal(a, b)


@pytest.mark.parametrize("make", [
    lambda: BiasedCoin(1.2), lambda: ConstantBias(1.5), lambda: RatePath(0.0),
    lambda: RatePath(1.0, n_start=1), lambda: AdversarialMinimizer(0.0),
    lambda: AdversarialMinimizer(1.1), lambda: VectorUnitBall(FairCoin(), "spiral"),
])
def test_invalid_reality_specs(make):
    with pytest.raises(ValueError):
        make()


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        FairCoin().build(np.random.default_rng(0), 3)
    with pytest.raises(ValueError):
        VectorUnitBall().build(np.random.default_rng(0), None)
    with pytest.raises(ValueError):
        VectorUnitBall(FairCoin(), "rotating").build(np.random.default_rng(0), 1)
