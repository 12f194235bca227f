"""
Optimal sequential strategies.

Three families of optima live here:

* the simultaneous optimum, which first minimizes the joint failure and then
  maximizes the joint success (closed forms, three prior regimes);
* the success-only optimum, which compares the interior stationary points
  (roots of a quartic) with the boundary strategies;
* the flip-flop strategies, which alternate randomly between the two
  boundary setups.

:func:`grid_oracle` evaluates the joint success on an exhaustive grid and is
used to cross-check all of them.
"""

from dataclasses import dataclass
import enum
import math

import logbook
import numpy as np
from scipy import optimize

from seqdisc.concurrency import run_partitioned
from seqdisc.exceptions import OutOfRange
from seqdisc.model import (Method, OptimizationResult, Regime, make_problem,
                           make_strategy, symmetric_strategy)


logger = logbook.Logger('seqdisc.optimizers')

#: Roots with a larger imaginary part are not physical.
IMAG_CUTOFF = 1e-9
#: Roots this close to an end of [s, 1] are pulled onto it.
CLAMP_TOLERANCE = 1e-9
#: Eigenvalues of a repeated root scatter by roughly eps ** (1/multiplicity).
ROOT_CLUSTER_RADIUS = 1e-4
#: Below this |P''| the sign change of the quartic decides the root type.
FLAT_CURVATURE = 1e-9
#: Interior candidates within this much of the boundary value count as ties.
TIE_TOLERANCE = 1e-12

CRITICAL_BRACKET = (1e-6, 0.25)
CRITICAL_XTOL = 1e-12


class RootKind(enum.Enum):
    LOCAL_MAX = 'local-max'
    LOCAL_MIN = 'local-min'
    NON_PHYSICAL = 'non-physical'


@dataclass(frozen=True)
class QuarticRootReport(object):

    """
    The stationary points of the one-parameter joint success.

    ``all_roots`` holds the four complex roots of the quartic and
    ``classification`` the :class:`RootKind` of each, in the same order.
    ``physical_roots`` are the distinct real roots inside ``[s, 1]``.
    """

    all_roots: np.ndarray
    physical_roots: tuple
    classification: tuple

    def maxima(self):
        found = []
        for root, kind in zip(self.all_roots, self.classification):
            if kind is RootKind.LOCAL_MAX:
                value = _physical_value(root)
                if value not in found:
                    found.append(value)
        return found


@dataclass(frozen=True)
class FlipFlopStrategy(object):

    """
    A flip-flop measurement: setup 1 is chosen with probability ``c``.

    Setup 1 is inconclusive on the first state (so it only ever identifies
    the second one); setup 2 is the mirror image.
    """

    c: float

    def __post_init__(self):
        if not (0.0 <= self.c <= 1.0):
            raise OutOfRange("flipping rate c = %r outside [0, 1]" % (self.c,))

    def swapped(self):
        return FlipFlopStrategy(c=1.0 - self.c)


## Joint probabilities

def joint_success(problem, strategy):
    """``P_ss = eta1 p1b p1c + eta2 p2b p2c``."""
    return (problem.eta1 * strategy.p1b * strategy.p1c +
            problem.eta2 * strategy.p2b * strategy.p2c)


def joint_failure(problem, strategy):
    """``P_ff = eta1 q1b q1c + eta2 q2b q2c``."""
    return (problem.eta1 * strategy.q1b * strategy.q1c +
            problem.eta2 * strategy.q2b * strategy.q2c)


def joint_success_reduced(problem, t, q1b, q1c):

    """
    The joint success as a function of the three free parameters.

    Accepts numpy arrays (broadcast together) as well as floats.
    """

    s, eta1, eta2 = problem.s, problem.eta1, problem.eta2
    t, q1b, q1c = np.asarray(t), np.asarray(q1b), np.asarray(q1c)
    q2b = np.divide(s * s, t * t * q1b, out=np.zeros(np.broadcast(t, q1b).shape),
                    where=(q1b * t) > 0)
    q2c = t * t / q1c
    value = eta1 * (1 - q1b) * (1 - q1c) + eta2 * (1 - q2b) * (1 - q2c)
    return value if value.ndim else float(value)


def success_single(problem, q1b):
    """The joint success on the symmetric family ``t = sqrt(s)``, ``q1c = q1b``."""
    q1b = np.asarray(q1b, dtype=float)
    value = (problem.eta1 * (1 - q1b) ** 2 +
             problem.eta2 * (1 - problem.s / q1b) ** 2)
    return value if value.ndim else float(value)


def observer_success(problem, strategy):
    """The individual success probabilities ``(P_sb, P_sc)``."""
    eta1, eta2 = problem.eta1, problem.eta2
    return (eta1 * strategy.p1b + eta2 * strategy.p2b,
            eta1 * strategy.p1c + eta2 * strategy.p2c)


## Minimum failure

def min_joint_failure(problem):

    """
    The smallest achievable joint failure probability.

    The joint failure depends on the strategy only through the product
    ``x = q1b q1c``, as ``eta1 x + eta2 s^2 / x`` with ``s^2 <= x <= 1``.

    :returns: ``(x_opt, p_ff_opt, regime)``.
    """

    s, eta1, eta2 = problem.s, problem.eta1, problem.eta2
    if eta1 < s * s / (1 + s * s):
        return 1.0, eta1 + eta2 * s * s, Regime.REGIME_LOW_PRIOR
    if eta1 > 1 / (1 + s * s):
        return s * s, eta2 + eta1 * s * s, Regime.REGIME_HIGH_PRIOR
    return (math.sqrt(eta2 / eta1) * s, 2 * math.sqrt(eta1 * eta2) * s,
            Regime.REGIME_MIDDLE)


def single_observer_failure(problem):

    """
    The optimal failure probability of a single unambiguous measurement.

    Minimizes ``eta1 q1 + eta2 s^2 / q1`` over ``s^2 <= q1 <= 1`` by clamping
    the unconstrained minimizer.
    """

    s, eta1, eta2 = problem.s, problem.eta1, problem.eta2
    q1 = min(max(math.sqrt(eta2 / eta1) * s, s * s), 1.0)
    if q1 == 0.0:
        return 0.0
    return eta1 * q1 + eta2 * s * s / q1


def _minfail_success(problem, regime):
    s, eta1, eta2 = problem.s, problem.eta1, problem.eta2
    if regime is Regime.REGIME_LOW_PRIOR:
        return eta2 * (1 - s) ** 2
    if regime is Regime.REGIME_HIGH_PRIOR:
        return eta1 * (1 - s) ** 2
    cross = (eta1 * eta2) ** 0.25 * math.sqrt(s)
    return ((math.sqrt(eta1) - cross) ** 2 + (math.sqrt(eta2) - cross) ** 2)


def optimize_minfail_success(problem):

    """
    Maximize the joint success among the strategies of least joint failure.

    Both ``t = sqrt(s)`` and ``q1c = x_opt / q1b`` are fixed by the failure
    optimum; ``q1b`` then takes its regime value.

    :raises OutOfRange: for orthogonal states (``s = 0``).
    """

    s, eta1, eta2 = problem.s, problem.eta1, problem.eta2
    if s <= 0.0:
        raise OutOfRange("the minimum-failure optimum needs s > 0")
    product, p_ff, regime = min_joint_failure(problem)
    if regime is Regime.REGIME_LOW_PRIOR:
        q1b = 1.0
    elif regime is Regime.REGIME_HIGH_PRIOR:
        q1b = s
    else:
        q1b = (eta2 / eta1) ** 0.25 * math.sqrt(s)
    strategy = make_strategy(problem, math.sqrt(s), q1b, product / q1b)
    p_ss = _minfail_success(problem, regime)
    logger.debug("Minimum-failure optimum for {0!r}: {1} regime, P_ss={2!r}",
                 problem, regime.value, p_ss)
    return OptimizationResult(strategy=strategy, p_ss=p_ss, p_ff=p_ff,
                              regime=regime, method=Method.CLOSED_FORM)


## Success only

def quartic_coefficients(problem):
    """Coefficients, highest degree first, of ``r q^4 - r q^3 + s q - s^2``."""
    r, s = problem.prior_ratio, problem.s
    return np.array([r, -r, 0.0, s, -s * s])


def _companion_roots(coefficients):
    p = np.asarray(coefficients, dtype=float)
    n = len(p) - 1
    companion = np.zeros((n, n))
    index = np.arange(n - 1)
    companion[index + 1, index] = 1
    companion[0, :] = -p[1:] / p[0]
    return np.linalg.eigvals(companion).astype(complex)


def _merge_clusters(roots):
    # A repeated root comes back as a small star of eigenvalues; replace each
    # cluster by its centroid.
    roots = np.array(sorted(roots, key=lambda z: (z.real, z.imag)))
    merged = roots.copy()
    used = np.zeros(len(roots), dtype=bool)
    for i in range(len(roots)):
        if used[i]:
            continue
        members = np.flatnonzero(
            ~used & (np.abs(roots - roots[i]) < ROOT_CLUSTER_RADIUS))
        used[members] = True
        merged[members] = roots[members].mean()
    return merged


def _physical_value(root):
    return float(np.real(root))


def success_curvature(problem, q):
    """``d^2 P / dq^2`` of :func:`success_single`."""
    s, eta1, eta2 = problem.s, problem.eta1, problem.eta2
    return 2 * eta1 + 2 * eta2 * (3 * s * s / q ** 4 - 2 * s / q ** 3)


def _classify(problem, q):
    curvature = success_curvature(problem, q)
    if curvature < -FLAT_CURVATURE:
        return RootKind.LOCAL_MAX
    if curvature > FLAT_CURVATURE:
        return RootKind.LOCAL_MIN
    # The derivative of P has the sign of the quartic.
    poly = quartic_coefficients(problem)
    before = np.polyval(poly, q - ROOT_CLUSTER_RADIUS)
    after = np.polyval(poly, q + ROOT_CLUSTER_RADIUS)
    if before > 0 > after:
        return RootKind.LOCAL_MAX
    return RootKind.LOCAL_MIN


def quartic_physical_roots(problem):

    """
    Find and classify the stationary points of :func:`success_single`.

    All four roots come from the eigenvalues of the companion matrix.
    Nearly real roots (imaginary part below :data:`IMAG_CUTOFF`) inside
    ``[s, 1]`` are physical and are classified by the curvature of the joint
    success there.

    :raises OutOfRange: for ``s = 0``, where the quartic degenerates.
    """

    s = problem.s
    if s <= 0.0:
        raise OutOfRange("the success quartic needs s > 0")
    roots = _merge_clusters(_companion_roots(quartic_coefficients(problem)))

    all_roots, kinds, physical = [], [], []
    for root in roots:
        if abs(root.imag) >= IMAG_CUTOFF:
            all_roots.append(root)
            kinds.append(RootKind.NON_PHYSICAL)
            continue
        q = root.real
        if s - CLAMP_TOLERANCE <= q < s:
            q = s
        elif 1.0 < q <= 1.0 + CLAMP_TOLERANCE:
            q = 1.0
        if not (s <= q <= 1.0):
            all_roots.append(complex(root.real, 0.0))
            kinds.append(RootKind.NON_PHYSICAL)
            continue
        all_roots.append(complex(q, 0.0))
        kinds.append(_classify(problem, q))
        if q not in physical:
            physical.append(q)

    report = QuarticRootReport(all_roots=np.array(all_roots),
                               physical_roots=tuple(physical),
                               classification=tuple(kinds))
    logger.debug("Quartic for {0!r}: physical roots {1!r}",
                 problem, report.physical_roots)
    return report


def boundary_success(problem):
    """The joint success of the better boundary strategy."""
    return problem.eta_max * (1 - problem.s) ** 2


def interior_success(problem):
    """The best interior local maximum of the joint success, or ``None``."""
    maxima = quartic_physical_roots(problem).maxima()
    if not maxima:
        return None
    return max((success_single(problem, q), q) for q in maxima)


def optimize_success_only(problem):

    """
    Maximize the joint success with no constraint on the failure.

    Interior candidates are the local maxima on the symmetric family
    ``t = sqrt(s)``, ``q1c = q1b``; the best is compared with the boundary
    value ``eta_max (1 - s)^2``. Ties go to the interior solution.

    :raises OutOfRange: for ``s = 0``.
    """

    boundary = boundary_success(problem)
    interior = interior_success(problem)
    if interior is not None and interior[0] >= boundary - TIE_TOLERANCE:
        p_ss, q = interior
        strategy = symmetric_strategy(problem, q)
        regime = Regime.INTERIOR
    elif problem.eta1 >= problem.eta2:
        strategy = symmetric_strategy(problem, problem.s)
        p_ss, regime = boundary, Regime.BOUNDARY_STATE1
    else:
        strategy = symmetric_strategy(problem, 1.0)
        p_ss, regime = boundary, Regime.BOUNDARY_STATE2
    logger.debug("Success-only optimum for {0!r}: {1}, P_ss={2!r}",
                 problem, regime.value, p_ss)
    return OptimizationResult(strategy=strategy, p_ss=p_ss,
                              p_ff=joint_failure(problem, strategy),
                              regime=regime, method=Method.ROOT_SOLVE)


def _interior_margin(eta1):
    def margin(s):
        problem = make_problem(s, eta1)
        boundary = boundary_success(problem)
        interior = interior_success(problem)
        if interior is None:
            return -boundary
        return interior[0] - boundary
    return margin


def critical_overlap(eta1):

    """
    The overlap above which the boundary strategies beat the interior one.

    Solved with Brent's method on ``interior - boundary`` over
    :data:`CRITICAL_BRACKET`. Returns ``nan`` if the sign never changes.
    """

    eta1 = float(eta1)
    if not (0.0 < eta1 < 1.0):
        raise OutOfRange("prior eta1 = %r outside (0, 1)" % (eta1,))
    margin = _interior_margin(eta1)
    lo, hi = CRITICAL_BRACKET
    at_lo, at_hi = margin(lo), margin(hi)
    if at_lo == 0.0:
        return lo
    if at_hi == 0.0:
        return hi
    if (at_lo > 0) == (at_hi > 0):
        logger.warning("No critical overlap in {0!r} for eta1={1!r}",
                       CRITICAL_BRACKET, eta1)
        return float('nan')
    return optimize.brentq(margin, lo, hi, xtol=CRITICAL_XTOL)


## Flip-flop

def ff_single(problem, ff):

    """
    A single flip-flop observer measuring Alice's qubit directly.

    :returns: ``(q1, q2, p_succ)``, the failure probabilities averaged over
        the flipping rate and the average success probability.
    """

    s, c = problem.s, ff.c
    q1 = c + (1 - c) * s * s
    q2 = 1 - c + c * s * s
    p_succ = (problem.eta1 * (1 - c) + problem.eta2 * c) * (1 - s * s)
    return q1, q2, p_succ


def ff_setups(problem):
    """The two boundary strategies at ``t = sqrt(s)``: ``(setup1, setup2)``."""
    t = math.sqrt(problem.s)
    return (make_strategy(problem, t, 1.0, 1.0),
            make_strategy(problem, t, problem.s, problem.s))


def ff_stage_failures(problem, ff):
    """Each stage's failures averaged over the flipping rate: ``(q1b, q2b, q1c, q2c)``."""
    s, c = problem.s, ff.c
    q1 = c + (1 - c) * s
    q2 = c * s + 1 - c
    return q1, q2, q1, q2


def ff_sequential_joint(problem, ff):
    """Joint success of two independent flip-flop observers."""
    c = ff.c
    return ((1 - c) ** 2 * problem.eta1 + c * c * problem.eta2) * (
        1 - problem.s) ** 2


def ff_sequential_failure(problem, ff):
    """Joint failure of two independent flip-flop observers."""
    q1, q2, _, _ = ff_stage_failures(problem, ff)
    return problem.eta1 * q1 * q1 + problem.eta2 * q2 * q2


## Exhaustive search

def _grid_block(problem, t, n):
    q1b = np.linspace((problem.s / t) ** 2, 1.0, n)
    q1c = np.linspace(t * t, 1.0, n)
    values = joint_success_reduced(problem, t, q1b[:, None], q1c[None, :])
    i, j = np.unravel_index(np.argmax(values), values.shape)
    return float(values[i, j]), float(t), float(q1b[i]), float(q1c[j])


def _grid_regime(strategy):
    def at_one(*values):
        return all(abs(v - 1.0) <= CLAMP_TOLERANCE for v in values)
    if at_one(strategy.q2b, strategy.q2c):
        return Regime.BOUNDARY_STATE1
    if at_one(strategy.q1b, strategy.q1c):
        return Regime.BOUNDARY_STATE2
    return Regime.INTERIOR


def grid_oracle(problem, n_per_axis, workers=None):

    """
    Brute-force maximum of the joint success over ``(t, q1b, q1c)``.

    Each axis spans its admissible interval with both ends included, so the
    faces of the feasible box (the boundary strategies among them) are
    sampled. Ties between grid points go to the lexicographically smallest
    ``(t, q1b, q1c)``, whatever the number of worker threads.
    """

    n = int(n_per_axis)
    if n < 50:
        raise OutOfRange("grid oracle needs at least 50 points per axis")
    ts = np.linspace(max(problem.s, 1.0 / n), 1.0, n)
    blocks = run_partitioned(lambda t: _grid_block(problem, t, n), ts,
                             workers=workers)
    p_ss, t, q1b, q1c = min(blocks, key=lambda b: (-b[0], b[1], b[2], b[3]))
    strategy = make_strategy(problem, t, q1b, q1c)
    logger.debug("Grid oracle for {0!r} (n={1}): P_ss={2!r}", problem, n, p_ss)
    return OptimizationResult(strategy=strategy, p_ss=p_ss,
                              p_ff=joint_failure(problem, strategy),
                              regime=_grid_regime(strategy), method=Method.GRID)
