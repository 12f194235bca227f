"""
Problem instances, state embeddings and sequential strategies.

Alice prepares one of two pure qubit states with real overlap ``s`` and
priors ``eta1``, ``eta2 = 1 - eta1``. Bob and then Charlie each perform an
unambiguous measurement; their strategy is fixed by the overlap ``t`` of the
qubit states Bob hands on and by the free failure probabilities ``q1b`` and
``q1c``. Everything else follows from unitarity:

    s / t = sqrt(q1b * q2b),    t = sqrt(q1c * q2c)

All types here are immutable.
"""

from dataclasses import dataclass
import enum
import math

import logbook
import numpy as np

from seqdisc.exceptions import ConstraintViolation, OutOfRange


logger = logbook.Logger('seqdisc.model')

#: Absolute tolerance for every constraint check.
TOLERANCE = 1e-10


@dataclass(frozen=True)
class DiscriminationProblem(object):

    """
    An instance of the discrimination problem.

    Only ``eta1`` is stored; ``eta2`` is always derived, so the priors sum to
    one by construction. Use :func:`make_problem` to build validated
    instances.
    """

    s: float
    eta1: float

    @property
    def eta2(self):
        return 1.0 - self.eta1

    @property
    def eta_max(self):
        return max(self.eta1, self.eta2)

    @property
    def prior_ratio(self):
        """``eta1 / eta2``, the leading coefficient of the success quartic."""
        return self.eta1 / self.eta2

    @property
    def equal_priors(self):
        return abs(self.eta1 - 0.5) < 1e-12

    def swapped(self):
        """The same problem with the two states relabelled."""
        return DiscriminationProblem(s=self.s, eta1=self.eta2)


@dataclass(frozen=True)
class StatePair(object):

    """Two unit qubit vectors with a real, non-negative inner product."""

    psi1: np.ndarray
    psi2: np.ndarray
    overlap: float

    def __iter__(self):
        return iter((self.psi1, self.psi2))

    def __getitem__(self, index):
        """Index by state label, 1 or 2."""
        if index == 1:
            return self.psi1
        if index == 2:
            return self.psi2
        raise IndexError("state labels are 1 and 2, not %r" % (index,))


@dataclass(frozen=True)
class SequentialStrategy(object):

    """
    Failure probabilities of Bob and Charlie together with the intermediate
    overlap ``t``. Build these with :func:`make_strategy`, which derives
    ``q2b`` and ``q2c`` from the unitarity constraints.
    """

    t: float
    q1b: float
    q2b: float
    q1c: float
    q2c: float

    @property
    def p1b(self):
        return 1.0 - self.q1b

    @property
    def p2b(self):
        return 1.0 - self.q2b

    @property
    def p1c(self):
        return 1.0 - self.q1c

    @property
    def p2c(self):
        return 1.0 - self.q2c

    def bob_failures(self):
        return self.q1b, self.q2b

    def charlie_failures(self):
        return self.q1c, self.q2c

    def swapped(self):
        """The strategy seen with the two state labels exchanged."""
        return SequentialStrategy(t=self.t, q1b=self.q2b, q2b=self.q1b,
                                  q1c=self.q2c, q2c=self.q1c)

    def check(self, problem):

        """
        Validate every unitarity constraint against `problem`.

        :raises ConstraintViolation: if the strategy is not physically
            realizable for this problem.
        """

        s, t = problem.s, self.t
        for name in ('q1b', 'q2b', 'q1c', 'q2c'):
            value = getattr(self, name)
            if not (-TOLERANCE <= value <= 1.0 + TOLERANCE):
                raise ConstraintViolation(
                    "%s = %r is not a probability" % (name, value))
        if not (s - TOLERANCE <= t <= 1.0 + TOLERANCE) or t <= 0.0:
            raise ConstraintViolation(
                "t = %r outside (max(s, 0), 1] for s = %r" % (t, s))
        if abs(s / t - math.sqrt(self.q1b * self.q2b)) > TOLERANCE:
            raise ConstraintViolation(
                "Bob's failures violate s/t = sqrt(q1b q2b) "
                "(s=%r, t=%r, q1b=%r, q2b=%r)" % (s, t, self.q1b, self.q2b))
        if abs(t - math.sqrt(self.q1c * self.q2c)) > TOLERANCE:
            raise ConstraintViolation(
                "Charlie's failures violate t = sqrt(q1c q2c) "
                "(t=%r, q1c=%r, q2c=%r)" % (t, self.q1c, self.q2c))
        product = self.q1b * self.q2b * self.q1c * self.q2c
        if abs(product - s * s) > TOLERANCE:
            raise ConstraintViolation(
                "failure product %r differs from s^2 = %r" % (product, s * s))
        return self


def make_problem(s, eta1):

    """
    Build a validated :class:`DiscriminationProblem`.

    :param s: overlap of the two prepared states, ``0 <= s < 1``.
    :param eta1: prior of the first state, ``0 < eta1 < 1``.
    :raises OutOfRange: for identical states (``s = 1``) or degenerate priors.
    """

    s, eta1 = float(s), float(eta1)
    if not (0.0 <= s < 1.0):
        raise OutOfRange("overlap s = %r outside [0, 1)" % (s,))
    if not (0.0 < eta1 < 1.0):
        raise OutOfRange("prior eta1 = %r outside (0, 1)" % (eta1,))
    return DiscriminationProblem(s=s, eta1=eta1)


def embed_states(overlap):

    """
    The canonical real embedding of two states with the given overlap.

    Returns ``cos(theta)|0> +- sin(theta)|1>`` with ``theta = arccos(overlap)
    / 2``. The same embedding, applied to ``t``, fixes Bob's post-measurement
    states.
    """

    overlap = float(overlap)
    if not (0.0 <= overlap <= 1.0):
        raise OutOfRange("overlap %r outside [0, 1]" % (overlap,))
    theta = 0.5 * math.acos(overlap)
    cos, sin = math.cos(theta), math.sin(theta)
    psi1 = np.array([cos, sin], dtype=complex)
    psi2 = np.array([cos, -sin], dtype=complex)
    psi1.flags.writeable = False
    psi2.flags.writeable = False
    return StatePair(psi1=psi1, psi2=psi2, overlap=overlap)


def _clamp(value, lower, upper):
    # Pull values that sit within TOLERANCE of a bound back onto it.
    if lower - TOLERANCE <= value < lower:
        return lower
    if upper < value <= upper + TOLERANCE:
        return upper
    return value


def make_strategy(problem, t, q1b, q1c):

    """
    Build a :class:`SequentialStrategy` from the three free parameters.

    :param t: intermediate overlap, ``s <= t <= 1`` and ``t > 0``.
    :param q1b: Bob's failure on state 1, ``s^2/t^2 <= q1b <= 1``.
    :param q1c: Charlie's failure on state 1, ``t^2 <= q1c <= 1``.
    :raises ConstraintViolation: if any bound fails.
    """

    s = problem.s
    t, q1b, q1c = float(t), float(q1b), float(q1c)
    if t <= 0.0:
        raise ConstraintViolation(
            "t = %r leaves q2b = s^2/(t^2 q1b) undefined" % (t,))
    t = _clamp(t, s, 1.0)
    if not (s <= t <= 1.0):
        raise ConstraintViolation("t = %r outside [%r, 1]" % (t, s))

    q1b_min = (s / t) ** 2
    q1b = _clamp(q1b, q1b_min, 1.0)
    if not (q1b_min <= q1b <= 1.0) or q1b <= 0.0:
        raise ConstraintViolation(
            "q1b = %r outside [s^2/t^2 = %r, 1]" % (q1b, q1b_min))

    q1c_min = t * t
    q1c = _clamp(q1c, q1c_min, 1.0)
    if not (q1c_min <= q1c <= 1.0):
        raise ConstraintViolation(
            "q1c = %r outside [t^2 = %r, 1]" % (q1c, q1c_min))

    q2b = min(1.0, s * s / (t * t * q1b))
    q2c = min(1.0, t * t / q1c)
    return SequentialStrategy(t=t, q1b=q1b, q2b=q2b, q1c=q1c, q2c=q2c)


def symmetric_strategy(problem, q1b):
    """The strategy with ``t = sqrt(s)`` and equal stage failures."""
    return make_strategy(problem, math.sqrt(problem.s), q1b, q1b)


def boundary_strategy(problem, state):

    """
    The boundary strategy in which both observers only ever identify `state`.

    For ``state == 1`` the second state always fails (``q2b = q2c = 1``);
    for ``state == 2`` the first one does.
    """

    if state == 1:
        return symmetric_strategy(problem, problem.s)
    if state == 2:
        return symmetric_strategy(problem, 1.0)
    raise OutOfRange("state labels are 1 and 2, not %r" % (state,))


class Regime(enum.Enum):
    INTERIOR = 'interior'
    BOUNDARY_STATE1 = 'boundary-state1'
    BOUNDARY_STATE2 = 'boundary-state2'
    REGIME_LOW_PRIOR = 'low-prior'
    REGIME_MIDDLE = 'middle'
    REGIME_HIGH_PRIOR = 'high-prior'


class Method(enum.Enum):
    CLOSED_FORM = 'closed-form'
    ROOT_SOLVE = 'root-solve'
    GRID = 'grid'


@dataclass(frozen=True)
class OptimizationResult(object):

    """
    An optimal (or best found) strategy with its joint probabilities.

    .. py:attribute:: regime
        Which branch of the solution the optimum lies on (:class:`Regime`).

    .. py:attribute:: method
        How it was found (:class:`Method`).
    """

    strategy: SequentialStrategy
    p_ss: float
    p_ff: float
    regime: Regime
    method: Method
