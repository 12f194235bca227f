"""
Neumark dilations of the sequential measurements.

Each observer couples the qubit to a three-level ancilla with a unitary and
then measures the ancilla projectively: ``|0>`` is the inconclusive outcome,
``|1>`` and ``|2>`` identify the first and second state. The joint space is
ordered ancilla-major (basis index ``2 * ancilla + qubit``), so the block
belonging to ancilla outcome ``j`` is rows ``2j`` and ``2j + 1``, and the
ancilla always starts in ``|0>``.
"""

from dataclasses import dataclass
import enum

import logbook
import numpy as np

from seqdisc.exceptions import NumericalDegeneracy, OutOfRange
from seqdisc.model import embed_states


logger = logbook.Logger('seqdisc.neumark')

QUBIT_DIM = 2
ANCILLA_DIM = 3
DIM = QUBIT_DIM * ANCILLA_DIM

#: Residual norm below which a completion candidate is skipped.
COMPLETION_CUTOFF = 1e-8

#: Selected sectors with a smaller norm are impossible outcomes.
DEGENERACY_CUTOFF = 1e-14


class Role(enum.Enum):
    BOB = 'bob'
    CHARLIE = 'charlie'


def _embed(qubit, ancilla=0):
    vector = np.zeros(DIM, dtype=complex)
    vector[QUBIT_DIM * ancilla:QUBIT_DIM * (ancilla + 1)] = qubit
    return vector


def _orthonormalize(basis, vector):
    # Modified Gram-Schmidt, applied twice to keep orthogonality at the
    # level of rounding error.
    for _ in range(2):
        for b in basis:
            vector = vector - b * np.vdot(b, vector)
    return vector


def complete_basis(columns):

    """
    Extend orthonormal `columns` to an orthonormal basis of the joint space.

    The given columns are re-orthonormalized in order, then the standard
    basis vectors are offered in index order; any whose residual norm falls
    below :data:`COMPLETION_CUTOFF` is skipped. The result is deterministic.
    """

    basis = []
    candidates = list(columns) + list(np.eye(DIM, dtype=complex))
    for candidate in candidates:
        residual = _orthonormalize(basis, np.asarray(candidate, dtype=complex))
        norm = np.linalg.norm(residual)
        if norm < COMPLETION_CUTOFF:
            continue
        basis.append(residual / norm)
        if len(basis) == DIM:
            break
    return np.column_stack(basis)


def dilate(inputs, outputs):

    """
    Build a unitary mapping each input qubit state (ancilla in ``|0>``) to
    the corresponding joint output vector.

    The inputs may be linearly dependent (identical states); the action is
    then prescribed on their span only. Gram matrices of inputs and outputs
    are assumed to agree; the callers guarantee this via the unitarity
    constraints.
    """

    a1, a2 = (_embed(x) for x in inputs)
    b1, b2 = (np.asarray(y, dtype=complex) for y in outputs)

    domain, image = [a1 / np.linalg.norm(a1)], [b1 / np.linalg.norm(b1)]
    overlap = np.vdot(domain[0], a2)
    residual = a2 - overlap * domain[0]
    norm = np.linalg.norm(residual)
    if norm >= COMPLETION_CUTOFF:
        domain.append(residual / norm)
        image.append((b2 - overlap * image[0]) / norm)

    w_in = complete_basis(domain)
    w_out = complete_basis(image)
    return w_out @ w_in.conj().T


@dataclass(frozen=True)
class StageUnitary(object):

    """
    One observer's measurement as a unitary on qubit (x) ancilla.

    .. py:attribute:: matrix
        The 6x6 complex matrix in ancilla-major ordering.

    .. py:attribute:: role
        Which observer (:class:`Role`) the stage belongs to.
    """

    matrix: np.ndarray
    role: Role

    def apply(self, qubit_in):
        """The joint state ``U (qubit_in (x) |0>)``."""
        return self.matrix[:, :QUBIT_DIM] @ np.asarray(qubit_in, dtype=complex)

    def branches(self, qubit_in):

        """
        Outcome probabilities and post-measurement qubit states.

        Returns ``(probabilities, states)``: a length-3 array indexed by the
        ancilla outcome and a 3x2 array of renormalized qubit states (rows of
        zeros for impossible outcomes).
        """

        blocks = self.apply(qubit_in).reshape(ANCILLA_DIM, QUBIT_DIM)
        norms = np.linalg.norm(blocks, axis=1)
        states = np.zeros_like(blocks)
        possible = norms > 0.0
        states[possible] = blocks[possible] / norms[possible, None]
        return norms ** 2, states

    def to_pairs(self):
        """Row-major ``[re, im]`` pairs, for JSON dumps."""
        return [[float(z.real), float(z.imag)] for z in self.matrix.ravel()]


@dataclass(frozen=True)
class ProjectiveStage(object):

    """
    A von Neumann setup projecting on ``{|psi_k>, |psi_k_perp>}``.

    A click on ``|psi_k>`` is inconclusive; a click on the orthogonal
    complement can only come from the other state, so it identifies that
    state. Outcomes follow the ancilla convention (0 inconclusive, 1 and 2
    the identified state).
    """

    failing: np.ndarray
    identified: int

    def branches(self, qubit_in):
        qubit_in = np.asarray(qubit_in, dtype=complex)
        fail = self.failing
        perp = np.array([np.conj(fail[1]), -np.conj(fail[0])])
        states = np.zeros((ANCILLA_DIM, QUBIT_DIM), dtype=complex)
        probabilities = np.zeros(ANCILLA_DIM)
        probabilities[0] = abs(np.vdot(fail, qubit_in)) ** 2
        probabilities[self.identified] = abs(np.vdot(perp, qubit_in)) ** 2
        states[0] = fail
        states[self.identified] = perp
        return probabilities, states


def build_bob_unitary(problem, strategy):

    """
    Bob's dilation: ``|psi_i>|0> -> sqrt(p_ib)|phi_i>|i> + sqrt(q_ib)|phi_i>|0>``.

    The qubit leaves in ``|phi_i>`` whatever Bob's outcome, with
    ``<phi_1|phi_2> = t`` in the canonical embedding, so Charlie receives no
    trace of Bob's result.
    """

    strategy.check(problem)
    psi = embed_states(problem.s)
    phi = embed_states(strategy.t)
    outputs = [
        np.sqrt(strategy.q1b) * _embed(phi.psi1, 0)
        + np.sqrt(strategy.p1b) * _embed(phi.psi1, 1),
        np.sqrt(strategy.q2b) * _embed(phi.psi2, 0)
        + np.sqrt(strategy.p2b) * _embed(phi.psi2, 2),
    ]
    stage = StageUnitary(matrix=dilate(psi, outputs), role=Role.BOB)
    logger.debug("Built Bob's unitary for t={0!r}, defect {1:.3g}",
                 strategy.t, unitarity_defect(stage))
    return stage


def build_charlie_unitary(problem, strategy):

    """
    Charlie's dilation: ``|phi_i>|0> -> sqrt(p_ic)|0>|i> + sqrt(q_ic)|theta_0>|0>``.

    Both conclusive branches leave the qubit in ``|0>``; the common failure
    state is ``|theta_0> = (|phi_1> + |phi_2>) / norm``. For ``t = 1`` the
    two inputs coincide and the measurement is fully inconclusive.
    """

    strategy.check(problem)
    phi = embed_states(strategy.t)
    theta0 = phi.psi1 + phi.psi2
    theta0 = theta0 / np.linalg.norm(theta0)
    success = np.array([1.0, 0.0], dtype=complex)
    outputs = [
        np.sqrt(strategy.q1c) * _embed(theta0, 0)
        + np.sqrt(strategy.p1c) * _embed(success, 1),
        np.sqrt(strategy.q2c) * _embed(theta0, 0)
        + np.sqrt(strategy.p2c) * _embed(success, 2),
    ]
    stage = StageUnitary(matrix=dilate(phi, outputs), role=Role.CHARLIE)
    logger.debug("Built Charlie's unitary for t={0!r}, defect {1:.3g}",
                 strategy.t, unitarity_defect(stage))
    return stage


def unitarity_defect(u):
    """Largest entry magnitude of ``U^dagger U - I``."""
    matrix = getattr(u, 'matrix', u)
    matrix = np.asarray(matrix, dtype=complex)
    gram = matrix.conj().T @ matrix
    return float(np.max(np.abs(gram - np.eye(matrix.shape[0]))))


def measure_stage(u, qubit_in, rng):

    """
    Run one stage on a single qubit and measure the ancilla.

    This is the single-shot reference path. Bulk runs in
    :mod:`seqdisc.simulator` tabulate the same :meth:`StageUnitary.branches`
    once per distinct input state and sample from the table instead.

    :param u: a :class:`StageUnitary` (or any stage with ``branches``).
    :param qubit_in: the normalized incoming qubit state.
    :param rng: a ``numpy.random.Generator``; only it is mutated.
    :returns: ``(outcome, qubit_out)``.
    :raises NumericalDegeneracy: if an outcome of vanishing norm is drawn.
    """

    qubit_in = np.asarray(qubit_in, dtype=complex)
    if abs(np.linalg.norm(qubit_in) - 1.0) > 1e-10:
        raise OutOfRange("input qubit state is not normalized")
    probabilities, states = u.branches(qubit_in)
    cumulative = np.cumsum(probabilities)
    draw = rng.random() * cumulative[-1]
    outcome = int(min(np.searchsorted(cumulative, draw, side='right'),
                      ANCILLA_DIM - 1))
    if np.sqrt(probabilities[outcome]) < DEGENERACY_CUTOFF:
        raise NumericalDegeneracy(
            "outcome %d drawn with probability %r" % (
                outcome, probabilities[outcome]))
    return outcome, states[outcome]
