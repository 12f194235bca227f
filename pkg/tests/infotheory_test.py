import math

import numpy as np
import pytest

from seqdisc import infotheory
from seqdisc.exceptions import (ConstraintViolation, OutOfRange,
                                UnsupportedPriors)
from seqdisc.model import boundary_strategy, make_problem, symmetric_strategy
from seqdisc.optimizers import FlipFlopStrategy


def entropy(p):
    return -sum(x * math.log2(x) for x in (p, 1 - p) if x > 0)


def random_problems(count, seed=1995):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield make_problem(rng.uniform(0.02, 0.95), rng.uniform(0.05, 0.95))


def test_binary_entropy():
    assert infotheory.binary_entropy(0.5) == pytest.approx(1.0, abs=1e-15)
    assert infotheory.binary_entropy(0.0) == 0.0
    assert infotheory.binary_entropy(1.0) == 0.0
    assert infotheory.binary_entropy(0.11) == pytest.approx(0.499916, abs=1e-6)


def test_binary_entropy_works_on_arrays():
    values = infotheory.binary_entropy(np.array([0.0, 0.25, 0.75]))
    assert values.shape == (3,)
    assert values[1] == pytest.approx(values[2])


@pytest.mark.parametrize('p', [-0.1, 1.1, float('nan')])
def test_binary_entropy_outside_the_unit_interval(p):
    with pytest.raises(OutOfRange):
        infotheory.binary_entropy(p)


## Guessing and Helstrom

def test_guessing_information_on_the_boundary():
    problem = make_problem(0.4, 0.5)
    inconclusive = 0.5 + 0.5 * 0.16
    expected = 1 - inconclusive * entropy(0.5 / inconclusive)
    value = infotheory.mi_guessing(problem, 1.0, 0.16)
    assert value == pytest.approx(expected, abs=1e-12)
    assert value == pytest.approx(0.6643, abs=1e-4)


def test_guessing_information_limits():
    problem = make_problem(0.4, 0.3)
    assert infotheory.mi_guessing(problem, 1.0, 1.0) == pytest.approx(0.0, abs=1e-15)
    orthogonal = make_problem(0.0, 0.3)
    assert infotheory.mi_guessing(orthogonal, 0.0, 0.0) == \
        pytest.approx(entropy(0.3), abs=1e-12)


def test_guessing_information_rejects_unrealizable_failures():
    with pytest.raises(ConstraintViolation):
        infotheory.mi_guessing(make_problem(0.4, 0.5), 0.3, 0.3)


def test_helstrom():
    assert infotheory.helstrom_mi(make_problem(0.0, 0.5)) == 1.0
    assert infotheory.helstrom_mi(make_problem(0.4, 0.5)) == \
        pytest.approx(0.74977, abs=1e-5)


def test_helstrom_error_for_unequal_priors():
    error = infotheory.helstrom_error(make_problem(0.4, 0.2))
    assert error == pytest.approx(0.5 * (1 - math.sqrt(1 - 0.64 * 0.16)))


def test_helstrom_information_needs_equal_priors():
    with pytest.raises(UnsupportedPriors):
        infotheory.helstrom_mi(make_problem(0.4, 0.3))


@pytest.mark.parametrize('q1, q2', [(0.5, 0.5), (1.0, 0.16), (0.3, 0.8)])
def test_entropy_split_adds_up(q1, q2):
    problem = make_problem(0.4, 0.35)
    conclusive, inconclusive, flag = infotheory.entropy_split(problem, q1, q2)
    assert conclusive + inconclusive + flag == pytest.approx(entropy(0.35), abs=1e-12)
    assert conclusive + flag == pytest.approx(
        infotheory.mi_guessing(problem, q1, q2), abs=1e-12)


def test_flag_carries_no_information_for_equal_failures():
    _, _, flag = infotheory.entropy_split(make_problem(0.4, 0.35), 0.5, 0.5)
    assert abs(flag) < 1e-12


## Alice and one observer

def test_usd_ab_information():
    report = infotheory.mi_usd_ab(make_problem(0.25, 1.0 / 3.0), 0.25)
    assert report.mi == pytest.approx(0.75 * entropy(1.0 / 3.0), abs=1e-12)
    assert report.mi == pytest.approx(0.688722, abs=1e-6)
    assert report.p_success == pytest.approx(0.75)
    assert report.confidence1 == pytest.approx(1.0 / 3.0)


def test_usd_ab_information_rejects_too_small_failures():
    with pytest.raises(ConstraintViolation):
        infotheory.mi_usd_ab(make_problem(0.5, 0.5), 0.2)


def test_usd_ab_optimum_at_equal_priors():
    report = infotheory.optimize_mi_usd_ab(make_problem(0.3, 0.5))
    assert report.optimizer_arg == 0.3
    assert report.mi == pytest.approx(0.7, abs=1e-9)


def test_usd_ab_optimum_for_unequal_priors():
    problem = make_problem(0.5, 1.0 / 3.0)
    report = infotheory.optimize_mi_usd_ab(problem)
    q1 = report.optimizer_arg
    assert abs(infotheory.usd_ab_gradient(problem, q1)) < 1e-8
    assert q1 < 0.5
    assert abs(q1 - 0.5) < 0.05
    for other in (q1 - 1e-3, q1 + 1e-3):
        assert infotheory.mi_usd_ab(problem, other).mi < report.mi


@pytest.mark.parametrize('eta1', [0.5, 1.0 / 3.0])
def test_usd_ab_optimum_stays_close_to_the_approximation(eta1):
    for s in (0.1, 0.3, 0.5, 0.7, 0.9):
        problem = make_problem(s, eta1)
        report = infotheory.optimize_mi_usd_ab(problem)
        approximation = (1 - s) * entropy(eta1)
        assert report.mi >= approximation - 1e-12
        assert report.mi - approximation < 5e-3


def test_usd_ab_optimum_needs_non_orthogonal_states():
    with pytest.raises(OutOfRange):
        infotheory.optimize_mi_usd_ab(make_problem(0.0, 0.5))


def test_observer_information():
    problem = make_problem(0.25, 0.5)
    assert infotheory.mi_usd_observer(problem, 0.5, 0.5) == pytest.approx(0.5)
    assert infotheory.mi_usd_observer(problem, 1.0, 1.0) == 0.0


## Bob and Charlie

def test_bc_information_at_the_interior_point():
    problem = make_problem(0.25, 0.5)
    report = infotheory.mi_usd_bc(problem, symmetric_strategy(problem, 0.5))
    assert report.mi == pytest.approx(0.25, abs=1e-12)


def test_bc_information_vanishes_on_the_boundary():
    problem = make_problem(0.25, 0.5)
    assert infotheory.mi_usd_bc(problem, boundary_strategy(problem, 2)).mi == 0.0
    assert infotheory.mi_usd_bc(problem, boundary_strategy(problem, 1)).mi == \
        pytest.approx(0.0, abs=1e-15)


def test_bc_information_for_unequal_priors():
    problem = make_problem(0.36, 1.0 / 3.0)
    report = infotheory.mi_usd_bc(problem, symmetric_strategy(problem, 0.6))
    assert report.mi == pytest.approx(0.16 * entropy(1.0 / 3.0), abs=1e-12)


def test_bc_optimum_at_equal_priors():
    for s in (0.1, 0.25, 0.6):
        report = infotheory.optimize_mi_usd_bc(make_problem(s, 0.5))
        assert report.optimizer_arg == pytest.approx(math.sqrt(s), abs=1e-12)
        assert report.mi == pytest.approx((1 - math.sqrt(s)) ** 2, abs=1e-9)


def test_bc_optimum_is_slightly_above_the_symmetric_point():
    for s in (0.3, 0.5, 0.7):
        problem = make_problem(s, 0.25)
        report = infotheory.optimize_mi_usd_bc(problem)
        approximation = (1 - math.sqrt(s)) ** 2 * entropy(0.25)
        assert report.mi >= approximation - 1e-12
        assert report.mi - approximation < 5e-3
        assert abs(infotheory.usd_bc_gradient(problem, report.optimizer_arg)) < 1e-8


## Flip-flop

def test_flipflop_information():
    problem = make_problem(0.4, 0.5)
    assert infotheory.mi_ff_ab(problem, FlipFlopStrategy(0.5)).mi == \
        pytest.approx(0.5 * (1 - 0.16), abs=1e-12)
    for c in (0.0, 1.0):
        assert infotheory.mi_ff_ab(problem, FlipFlopStrategy(c)).mi == 0.0


def test_flipflop_information_at_the_balanced_rate():
    problem = make_problem(0.3, 0.2)
    report = infotheory.mi_ff_ab(problem, FlipFlopStrategy(0.2))
    assert report.mi == pytest.approx(2 * 0.2 * 0.8 * (1 - 0.09), abs=1e-12)


def test_flipflop_optimum_at_equal_priors():
    report = infotheory.optimize_mi_ff_ab(make_problem(0.4, 0.5))
    assert report.optimizer_arg == 0.5
    assert report.mi == pytest.approx(0.42, abs=1e-9)


def test_flipflop_optimum_for_unequal_priors():
    problem = make_problem(0.0, 0.25)
    report = infotheory.optimize_mi_ff_ab(problem)
    assert report.mi < 1.0
    assert abs(infotheory.ff_ab_gradient(problem, report.optimizer_arg)) < 1e-8


def test_flipflop_information_is_unimodal_in_the_rate():
    problem = make_problem(0.4, 0.3)
    rates = np.linspace(0.0, 1.0, 1000)
    values = [infotheory.mi_ff_ab(problem, FlipFlopStrategy(c)).mi for c in rates]
    slopes = np.sign(np.diff(values))
    assert np.count_nonzero(slopes[:-1] != slopes[1:]) == 1


def test_sequential_flipflop_information():
    problem = make_problem(0.25, 0.5)
    t = math.sqrt(problem.s)
    assert infotheory.mi_ff_bc(problem, FlipFlopStrategy(0.5), t) == \
        pytest.approx(0.140625, abs=1e-12)
    for c in (0.0, 1.0):
        assert infotheory.mi_ff_bc(problem, FlipFlopStrategy(c), t) == 0.0


def test_sequential_flipflop_information_at_the_balanced_rate():
    for problem in random_problems(10, seed=4):
        eta1, eta2, s = problem.eta1, problem.eta2, problem.s
        value = infotheory.mi_ff_bc(problem, FlipFlopStrategy(eta1), math.sqrt(s))
        assert value == pytest.approx(
            eta1 * eta2 * (1 - s) ** 2 * entropy(eta2), abs=1e-12)


def test_sequential_flipflop_never_beats_the_povm():
    for problem in random_problems(50):
        value = infotheory.mi_ff_bc(problem, FlipFlopStrategy(problem.eta1),
                                    math.sqrt(problem.s))
        assert value <= infotheory.optimize_mi_usd_bc(problem).mi + 1e-12


def test_sequential_flipflop_needs_a_realizable_overlap():
    with pytest.raises(ConstraintViolation):
        infotheory.mi_ff_bc(make_problem(0.5, 0.5), FlipFlopStrategy(0.5), 0.3)


def test_conclusive_information():
    assert infotheory.conclusive_information(0.0, 0.0) == 0.0
    assert infotheory.conclusive_information(0.3, 0.3) == pytest.approx(0.6)
    assert infotheory.conclusive_information(0.4, 0.0) == 0.0
    problem = make_problem(0.2, 0.5)
    assert infotheory.conclusive_information(0.5 * 0.5, 0.5 * 0.9) == \
        pytest.approx(infotheory.mi_usd_observer(problem, 0.5, 0.1))


@pytest.mark.parametrize('t', [0.3, 0.45, 1.2])
def test_sequential_flipflop_overlap_must_square_into_range(t):
    # s <= t < sqrt(s) is still unrealizable.
    with pytest.raises(ConstraintViolation):
        infotheory.mi_ff_bc(make_problem(0.25, 0.5), FlipFlopStrategy(0.5), t)


def test_relabelling_the_states_leaves_information_unchanged():
    for problem in random_problems(20, seed=12):
        s2 = problem.s ** 2
        for q1 in np.linspace(s2, 1.0, 7)[1:-1]:
            q2 = s2 / q1
            assert infotheory.mi_usd_ab(problem.swapped(), q2).mi == \
                pytest.approx(infotheory.mi_usd_ab(problem, q1).mi, abs=1e-12)
            assert infotheory.mi_guessing(problem.swapped(), q2, q1) == \
                pytest.approx(infotheory.mi_guessing(problem, q1, q2), abs=1e-12)


@pytest.mark.parametrize('s, eta1', [(0.2, 0.5), (0.5, 0.5), (0.3, 0.3),
                                     (0.6, 0.8)])
def test_usd_information_is_concave_in_the_failure(s, eta1):
    problem = make_problem(s, eta1)
    grid = np.linspace(s * s, 1.0, 1000)[1:-1]
    values = np.array([infotheory.mi_usd_ab(problem, q1).mi for q1 in grid])
    assert np.all(np.diff(values, 2) <= 1e-12)
