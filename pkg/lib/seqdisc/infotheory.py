"""
Entropies and mutual information of the discrimination channels.

Every information rate counted over conclusive outcomes only has the same
shape: with ``w1`` and ``w2`` the probabilities that state 1 (resp. 2) was
sent and conclusively identified, and ``P = w1 + w2``,

    I = P H(w1 / P) = w1 log2(P / w1) + w2 log2(P / w2)

and, when the weights depend on one parameter ``x``,

    dI/dx = w1' log2(P / w1) + w2' log2(P / w2)

The optimizers below find the zero of that derivative with Brent's method.
All logarithms are base 2 and ``0 log 0 = 0``.
"""

from dataclasses import dataclass
import math

import logbook
import numpy as np
from scipy import optimize, special

from seqdisc.exceptions import (ConstraintViolation, OutOfRange,
                                UnsupportedPriors)
from seqdisc.model import TOLERANCE, symmetric_strategy
from seqdisc.optimizers import FlipFlopStrategy, joint_success


logger = logbook.Logger('seqdisc.infotheory')

#: Relative distance from the ends of a search interval, where the
#: derivative diverges.
EDGE = 1e-9
XTOL = 1e-13


@dataclass(frozen=True)
class ChannelReport(object):

    """
    One conclusive-outcome channel evaluated at a parameter value.

    .. py:attribute:: confidence1
        Probability that a conclusive outcome came from state 1.

    .. py:attribute:: optimizer_arg
        The parameter (``q1``, ``q1b`` or ``c``) the channel was evaluated
        at.
    """

    p_success: float
    confidence1: float
    mi: float
    optimizer_arg: float


def binary_entropy(p):

    """
    Shannon entropy, in bits, of a binary distribution ``(p, 1 - p)``.

    Works elementwise on arrays.

    :raises OutOfRange: if any ``p`` lies outside ``[0, 1]``.
    """

    p = np.asarray(p, dtype=float)
    if np.any((p < 0.0) | (p > 1.0)) or np.any(np.isnan(p)):
        raise OutOfRange("binary entropy undefined at p = %r" % (p,))
    value = (special.entr(p) + special.entr(1.0 - p)) / math.log(2)
    return value if value.ndim else float(value)


def _log_ratio(total, part):
    if part <= 0.0:
        return math.inf
    return math.log2(total / part)


def conclusive_information(w1, w2):
    """``P H(w1 / P)`` with ``P = w1 + w2``; zero when nothing is conclusive."""
    total = w1 + w2
    if total <= 0.0:
        return 0.0
    share = min(max(w1 / total, 0.0), 1.0)
    return total * binary_entropy(share)


def _gradient(w, dw):
    (w1, w2), (dw1, dw2) = w, dw
    total = w1 + w2
    value = 0.0
    for part, slope in ((w1, dw1), (w2, dw2)):
        if slope != 0.0:
            value += slope * _log_ratio(total, part)
    return value


def _report(w1, w2, eta1, arg):
    total = w1 + w2
    confidence = w1 / total if total > 0.0 else eta1
    return ChannelReport(p_success=total, confidence1=confidence,
                         mi=conclusive_information(w1, w2),
                         optimizer_arg=float(arg))


def _maximize(information, gradient, lo, hi):

    # The objectives are concave with a derivative running from +inf to
    # -inf, so the maximum is the single zero of the derivative.

    span = hi - lo
    a, b = lo + EDGE * span, hi - EDGE * span
    at_a, at_b = gradient(a), gradient(b)
    if at_a > 0.0 > at_b:
        return optimize.brentq(gradient, a, b, xtol=XTOL)
    logger.debug("No interior stationary point in [{0!r}, {1!r}]", lo, hi)
    return lo if information(lo) >= information(hi) else hi


## Guessing and Helstrom

def mi_guessing(problem, q1, q2):

    """
    Information when every inconclusive outcome is turned into a best guess.

    ``I = H(eta1) - Q H(eta1 q1 / Q)`` with ``Q = eta1 q1 + eta2 q2``.

    :raises ConstraintViolation: for failure pairs no measurement achieves.
    """

    _check_failures(problem, q1, q2)
    eta1, eta2 = problem.eta1, problem.eta2
    inconclusive = eta1 * q1 + eta2 * q2
    residual = 0.0
    if inconclusive > 0.0:
        residual = inconclusive * binary_entropy(
            min(eta1 * q1 / inconclusive, 1.0))
    return binary_entropy(eta1) - residual


def helstrom_error(problem):
    """The minimum error probability for telling the two states apart."""
    return 0.5 * (1 - math.sqrt(
        1 - 4 * problem.eta1 * problem.eta2 * problem.s ** 2))


def helstrom_mi(problem):

    """
    Information of the minimum-error measurement, ``1 - H(p_e)``.

    :raises UnsupportedPriors: unless the priors are equal.
    """

    if not problem.equal_priors:
        raise UnsupportedPriors(
            "Helstrom information needs equal priors, not eta1=%r" % (
                problem.eta1,))
    return 1.0 - binary_entropy(helstrom_error(problem))


def entropy_split(problem, q1, q2):

    """
    Split ``H(eta1)`` along the conclusive/inconclusive flag ``F``.

    :returns: ``(conclusive, inconclusive, flag)`` with ``conclusive =
        P_s H(X | conclusive)``, ``inconclusive = Q H(X | inconclusive)`` and
        ``flag = I(X : F)``; the three add up to ``H(eta1)``. The flag term
        vanishes exactly when ``q1 == q2``.
    """

    _check_failures(problem, q1, q2)
    eta1, eta2 = problem.eta1, problem.eta2
    conclusive = conclusive_information(eta1 * (1 - q1), eta2 * (1 - q2))
    inconclusive = conclusive_information(eta1 * q1, eta2 * q2)
    p_success = eta1 * (1 - q1) + eta2 * (1 - q2)
    flag = (binary_entropy(min(max(p_success, 0.0), 1.0)) -
            eta1 * binary_entropy(q1) - eta2 * binary_entropy(q2))
    return conclusive, inconclusive, flag


def _check_failures(problem, q1, q2):
    for name, value in (('q1', q1), ('q2', q2)):
        if not (0.0 <= value <= 1.0):
            raise ConstraintViolation(
                "%s = %r is not a probability" % (name, value))
    if q1 * q2 < problem.s ** 2 - 1e-12:
        raise ConstraintViolation(
            "failures q1=%r, q2=%r beat the bound q1 q2 >= s^2 = %r" % (
                q1, q2, problem.s ** 2))


## Alice and one observer

def _usd_ab_failures(problem, q1):
    s = problem.s
    if not (s * s - TOLERANCE <= q1 <= 1.0 + TOLERANCE):
        raise ConstraintViolation(
            "q1 = %r outside [s^2 = %r, 1]" % (q1, s * s))
    q1 = min(max(q1, s * s), 1.0)
    q2 = min(s * s / q1, 1.0) if q1 > 0.0 else 0.0
    return q1, q2


def mi_usd_ab(problem, q1):

    """
    Alice-Bob information over conclusive outcomes, with ``q2 = s^2 / q1``.

    :raises ConstraintViolation: unless ``s^2 <= q1 <= 1``.
    """

    q1, q2 = _usd_ab_failures(problem, q1)
    return _report(problem.eta1 * (1 - q1), problem.eta2 * (1 - q2),
                   problem.eta1, q1)


def usd_ab_gradient(problem, q1):
    """``d mi_usd_ab / d q1``."""
    q1, q2 = _usd_ab_failures(problem, q1)
    eta1, eta2, s = problem.eta1, problem.eta2, problem.s
    return _gradient((eta1 * (1 - q1), eta2 * (1 - q2)),
                     (-eta1, eta2 * s * s / (q1 * q1)))


def optimize_mi_usd_ab(problem):

    """
    Maximize :func:`mi_usd_ab` over ``s^2 <= q1 <= 1``.

    Equal priors give ``q1 = s`` exactly.
    """

    s = problem.s
    if s <= 0.0:
        raise OutOfRange("the A:B information optimum needs s > 0")
    if problem.equal_priors:
        return mi_usd_ab(problem, s)
    q1 = _maximize(lambda q: mi_usd_ab(problem, q).mi,
                   lambda q: usd_ab_gradient(problem, q), s * s, 1.0)
    return mi_usd_ab(problem, q1)


def mi_usd_observer(problem, q1_obs, q2_obs):
    """Information one observer with failures ``(q1_obs, q2_obs)`` gains."""
    _check_failures(problem, q1_obs, q2_obs)
    return conclusive_information(problem.eta1 * (1 - q1_obs),
                                  problem.eta2 * (1 - q2_obs))


## Bob and Charlie

def mi_usd_bc(problem, strategy):
    """Information shared by Bob and Charlie over their common conclusive rounds."""
    w1 = problem.eta1 * strategy.p1b * strategy.p1c
    w2 = problem.eta2 * strategy.p2b * strategy.p2c
    report = _report(w1, w2, problem.eta1, strategy.q1b)
    logger.debug("B:C information {0!r} (P_ss={1!r})", report.mi,
                 joint_success(problem, strategy))
    return report


def usd_bc_gradient(problem, q1b):
    """``d mi_usd_bc / d q1b`` on the symmetric family ``t = sqrt(s)``, ``q1c = q1b``."""
    eta1, eta2, s = problem.eta1, problem.eta2, problem.s
    q = float(q1b)
    if not (s - TOLERANCE <= q <= 1.0 + TOLERANCE):
        raise ConstraintViolation("q1b = %r outside [s = %r, 1]" % (q, s))
    w = (eta1 * (1 - q) ** 2, eta2 * (1 - s / q) ** 2)
    dw = (-2 * eta1 * (1 - q), 2 * eta2 * (1 - s / q) * s / (q * q))
    return _gradient(w, dw)


def optimize_mi_usd_bc(problem):

    """
    Maximize :func:`mi_usd_bc` over the symmetric family ``s <= q1b <= 1``.

    Equal priors give ``q1b = sqrt(s)`` exactly.
    """

    s = problem.s
    if s <= 0.0:
        raise OutOfRange("the B:C information optimum needs s > 0")
    if problem.equal_priors:
        q1b = math.sqrt(s)
    else:
        q1b = _maximize(
            lambda q: mi_usd_bc(problem, symmetric_strategy(problem, q)).mi,
            lambda q: usd_bc_gradient(problem, q), s, 1.0)
    return mi_usd_bc(problem, symmetric_strategy(problem, q1b))


## Flip-flop

def mi_ff_ab(problem, ff):
    """Alice-Bob information of a single flip-flop observer."""
    scale = 1 - problem.s ** 2
    return _report(problem.eta1 * (1 - ff.c) * scale,
                   problem.eta2 * ff.c * scale, problem.eta1, ff.c)


def ff_ab_gradient(problem, c):
    """``d mi_ff_ab / d c``."""
    scale = 1 - problem.s ** 2
    eta1, eta2 = problem.eta1, problem.eta2
    return _gradient((eta1 * (1 - c) * scale, eta2 * c * scale),
                     (-eta1 * scale, eta2 * scale))


def optimize_mi_ff_ab(problem):

    """
    Maximize :func:`mi_ff_ab` over the flipping rate ``0 <= c <= 1``.

    Equal priors give ``c = 1/2`` exactly.
    """

    if problem.equal_priors:
        return mi_ff_ab(problem, FlipFlopStrategy(0.5))
    c = _maximize(lambda x: mi_ff_ab(problem, FlipFlopStrategy(x)).mi,
                  lambda x: ff_ab_gradient(problem, x), 0.0, 1.0)
    return mi_ff_ab(problem, FlipFlopStrategy(c))


def mi_ff_bc(problem, ff, t):

    """
    Bob-Charlie information of two independent flip-flop observers.

    Bob's boundary setups hand on states of overlap `t`; the value is
    ``F P H(eta1 (1 - c)^2 / P)`` with ``F = (1 - s^2/t^2)(1 - t^2)`` and
    ``P = eta1 (1 - c)^2 + eta2 c^2``.

    :raises ConstraintViolation: unless ``s <= t^2 <= 1``.
    """

    s, t = problem.s, float(t)
    if not (s - TOLERANCE <= t * t <= 1.0 + TOLERANCE) or t <= 0.0:
        raise ConstraintViolation(
            "t^2 = %r outside [s, 1] for s = %r" % (t * t, s))
    factor = (1 - s * s / (t * t)) * (1 - t * t)
    c = ff.c
    return conclusive_information(factor * problem.eta1 * (1 - c) ** 2,
                                  factor * problem.eta2 * c * c)
