import math
import os

import numpy as np
import pytest
from scipy import stats

from seqdisc import infotheory, optimizers, simulator
from seqdisc.exceptions import OutOfRange
from seqdisc.model import boundary_strategy, make_problem, symmetric_strategy
from seqdisc.optimizers import FlipFlopStrategy
from seqdisc.simulator import Estimate, Setup, TrialLedger

N = 10 ** 6


def assert_within_five_sigma(ledger, reference):
    stats = simulator.empirical_stats(ledger)
    scores = stats.z_scores(reference)
    assert set(scores) == set(reference)
    for name, z in scores.items():
        assert abs(z) < 5, (name, stats.rates[name], reference[name])
    assert stats.misidentifications == 0
    return stats


def binomial_z(value, expected, n):
    return (value - expected) / math.sqrt(expected * (1 - expected) / n)


@pytest.fixture(scope='module')
def interior_run():
    problem = make_problem(0.25, 0.5)
    strategy = optimizers.optimize_minfail_success(problem).strategy
    return problem, strategy, simulator.run_sequential(problem, strategy, N, 42)


## Sequential POVM runs

def test_interior_run_agrees_with_the_closed_forms(interior_run):
    problem, strategy, ledger = interior_run
    stats = assert_within_five_sigma(
        ledger, simulator.reference_rates(problem, strategy))
    assert abs(stats.rates['p_ss'].value - 0.25) < 5 * math.sqrt(0.25 * 0.75 / N)


def test_empirical_information_tracks_the_analytic_value(interior_run):
    problem, strategy, ledger = interior_run
    stats = simulator.empirical_stats(ledger)
    expected = infotheory.mi_usd_observer(problem, *strategy.bob_failures())
    assert abs(stats.mi['ab'] - expected) < 0.01
    expected = infotheory.mi_usd_bc(problem, strategy).mi
    assert abs(stats.mi['bc'] - expected) < 0.01


def test_stats_are_deterministic(interior_run):
    _, _, ledger = interior_run
    assert simulator.empirical_stats(ledger) == simulator.empirical_stats(ledger)


@pytest.mark.parametrize('state', [1, 2])
def test_stage_successes_are_independent_given_the_state(interior_run, state):
    _, _, ledger = interior_run
    mask = ledger.prepared == state
    bob = ledger.bob_outcome[mask] > 0
    charlie = ledger.charlie_outcome[mask] > 0
    table = [[np.count_nonzero(bob & charlie), np.count_nonzero(bob & ~charlie)],
             [np.count_nonzero(~bob & charlie), np.count_nonzero(~bob & ~charlie)]]
    _, p_value, _, _ = stats.chi2_contingency(table)
    assert p_value > 1e-4


def test_runs_with_different_seeds_are_independent():
    problem = make_problem(0.25, 0.5)
    strategy = symmetric_strategy(problem, 0.5)
    n = 2 * simulator.CHUNK + 17
    first = simulator.run_sequential(problem, strategy, n, 1001)
    second = simulator.run_sequential(problem, strategy, n, 1002)
    for field in ('prepared', 'bob_outcome', 'charlie_outcome'):
        a, b = getattr(first, field), getattr(second, field)
        levels = np.union1d(a, b)
        table = [[np.count_nonzero((a == x) & (b == y)) for y in levels]
                 for x in levels]
        _, p_value, _, _ = stats.chi2_contingency(table)
        assert p_value > 0.001, field


def test_boundary_run_never_identifies_the_first_state():
    problem = make_problem(0.3, 0.4)
    strategy = boundary_strategy(problem, 2)
    ledger = simulator.run_sequential(problem, strategy, 200000, 5)
    assert not np.any(ledger.bob_outcome == 1)
    assert not np.any(ledger.charlie_outcome == 1)
    assert_within_five_sigma(ledger, simulator.reference_rates(problem, strategy))


@pytest.mark.parametrize('s, eta1, scheme', [
    (0.3, 0.7, 'success-only'),
    (0.1, 0.35, 'success-only'),
    (0.2, 0.25, 'min-failure'),
])
def test_optimal_runs_agree_with_the_closed_forms(s, eta1, scheme):
    problem = make_problem(s, eta1)
    if scheme == 'success-only':
        strategy = optimizers.optimize_success_only(problem).strategy
    else:
        strategy = optimizers.optimize_minfail_success(problem).strategy
    ledger = simulator.run_sequential(problem, strategy, N, 7)
    assert_within_five_sigma(ledger, simulator.reference_rates(problem, strategy))


def test_run_records_the_povm_setup():
    problem = make_problem(0.2, 0.5)
    ledger = simulator.run_sequential(problem, symmetric_strategy(problem, 0.5),
                                      100, 1)
    assert ledger.has_charlie
    assert set(ledger.bob_setup) == {Setup.POVM}
    assert set(ledger.prepared) <= {1, 2}


## Flip-flop runs

def test_flipflop_run_with_a_fixed_setup():
    problem = make_problem(0.25, 0.7)
    ff = FlipFlopStrategy(0.0)
    ledger = simulator.run_flipflop_sequential(problem, ff, N, 3)
    assert set(ledger.bob_setup) == {Setup.FF2}
    stats = assert_within_five_sigma(
        ledger, simulator.reference_rates(problem, ff=ff))
    assert abs(binomial_z(stats.rates['p_ss'].value, 0.7 * 0.75 ** 2, N)) < 5


def test_balanced_flipflop_run_yields_a_balanced_key():
    problem = make_problem(0.25, 0.5)
    ff = FlipFlopStrategy(0.5)
    ledger = simulator.run_flipflop_sequential(problem, ff, N, 11)
    stats = assert_within_five_sigma(
        ledger, simulator.reference_rates(problem, ff=ff))
    assert abs(binomial_z(stats.rates['p_ss'].value, 0.140625, N)) < 5

    keys = simulator.sift_keys(ledger)
    assert keys.errors == 0
    n_abc = keys.n_conclusive['abc']
    assert abs(binomial_z(keys.balance['abc'], 0.5, n_abc)) < 5


def test_single_flipflop_observer_on_orthogonal_states():
    problem = make_problem(0.0, 0.5)
    ff = FlipFlopStrategy(0.5)
    ledger = simulator.run_flipflop_single(problem, ff, N, 13)
    assert not ledger.has_charlie
    stats = assert_within_five_sigma(
        ledger, simulator.reference_rates(problem, ff=ff, single=True))
    assert 'p_ss' not in stats.rates
    assert abs(binomial_z(1 - stats.rates['p1b'].value, 0.5,
                          stats.rates['p1b'].n)) < 5


def test_single_flipflop_observer_with_one_setup():
    problem = make_problem(0.4, 0.5)
    ff = FlipFlopStrategy(1.0)
    ledger = simulator.run_flipflop_single(problem, ff, N, 17)
    stats = assert_within_five_sigma(
        ledger, simulator.reference_rates(problem, ff=ff, single=True))
    assert stats.rates['p1b'].value == 0.0
    assert abs(binomial_z(stats.rates['p2b'].value, 0.84,
                          stats.rates['p2b'].n)) < 5
    assert set(ledger.charlie_outcome) == {-1}


## Determinism

def test_equal_seeds_give_identical_ledgers():
    problem = make_problem(0.3, 0.6)
    strategy = symmetric_strategy(problem, 0.7)
    n = 3 * simulator.CHUNK + 5
    serial = simulator.run_sequential(problem, strategy, n, 99, workers=1)
    threaded = simulator.run_sequential(problem, strategy, n, 99, workers=3)
    assert serial.identical(threaded)
    other = simulator.run_sequential(problem, strategy, n, 100)
    assert not serial.identical(other)


def test_large_runs_spool_to_disk(tmpdir, monkeypatch):
    monkeypatch.setattr(simulator, 'SPOOL_THRESHOLD', 100)
    problem = make_problem(0.3, 0.6)
    ff = FlipFlopStrategy(0.3)
    spooled = simulator.run_flipflop_sequential(problem, ff, 1000, 8,
                                                spool_dir=str(tmpdir))
    in_memory = simulator.run_flipflop_sequential(problem, ff, 1000, 8)
    assert spooled.identical(in_memory)
    assert os.path.exists(os.path.join(str(tmpdir), 'prepared.npy'))


@pytest.mark.parametrize('n, seed', [(0, 1), (10, -1), (10, 2 ** 64)])
def test_runs_reject_bad_sizes_and_seeds(n, seed):
    problem = make_problem(0.3, 0.6)
    with pytest.raises(OutOfRange):
        simulator.run_sequential(problem, symmetric_strategy(problem, 0.7),
                                 n, seed)


## Statistics

def test_estimates():
    estimate = Estimate.of(25, 100)
    assert estimate.value == 0.25
    assert estimate.stderr == pytest.approx(math.sqrt(0.25 * 0.75 / 100))
    assert estimate.z(0.25) == 0.0
    assert math.isnan(Estimate.of(0, 0).value)
    assert Estimate.of(0, 10).z(0.0) == 0.0
    assert math.isinf(Estimate.of(0, 10).z(0.5))


def test_reference_rates_need_a_strategy():
    with pytest.raises(OutOfRange):
        simulator.reference_rates(make_problem(0.3, 0.6))


## Sifting

def ledger_without_conclusive_rounds():
    prepared = np.array([1, 2, 1, 2], dtype=np.int8)
    zeros = np.zeros(4, dtype=np.int8)
    return TrialLedger(n=4, seed=0, prepared=prepared, bob_setup=zeros,
                       bob_outcome=zeros, charlie_setup=zeros,
                       charlie_outcome=zeros)


def test_sifting_without_conclusive_rounds():
    keys = simulator.sift_keys(ledger_without_conclusive_rounds())
    assert keys.keys() == {'ab': '', 'ac': '', 'abc': ''}
    assert keys.rates == {'ab': 0.0, 'ac': 0.0, 'abc': 0.0}
    assert all(math.isnan(value) for value in keys.balance.values())


def test_interior_key_rate_and_balance(interior_run):
    _, _, ledger = interior_run
    keys = simulator.sift_keys(ledger)
    assert keys.errors == 0
    assert abs(binomial_z(keys.rates['abc'], 0.25, N)) < 5
    assert abs(binomial_z(keys.balance['abc'], 0.5, keys.n_conclusive['abc'])) < 5
    assert len(keys.key_abc) == keys.n_conclusive['abc']
    assert set(keys.key_ab) == {'0', '1'}


def test_boundary_keys_are_constant():
    problem = make_problem(0.3, 0.5)
    ledger = simulator.run_sequential(problem, boundary_strategy(problem, 1),
                                      20000, 21)
    keys = simulator.sift_keys(ledger)
    assert keys.balance['ab'] == 0.0
    assert set(keys.key_ab) == {'0'}
    assert keys.errors == 0
