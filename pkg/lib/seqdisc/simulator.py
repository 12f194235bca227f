"""
Monte Carlo runs of the Alice -> Bob -> Charlie chain and key sifting.

A qubit only ever sits in one of a handful of states (Alice's two, the two
Bob hands on, ...). Before sampling, each stage is therefore tabulated once:
for every incoming state and every setup, the outcome probabilities and the
index of the resulting post-measurement state. Trials are then drawn in
vectorized chunks. Each chunk has its own random stream, spawned from the
run's seed by chunk index, so a ledger depends on the seed alone and never on
how many threads produced it.
"""

from dataclasses import dataclass
import enum
import math
import os

import logbook
import numpy as np

from seqdisc import optimizers
from seqdisc.concurrency import run_partitioned
from seqdisc.exceptions import OutOfRange
from seqdisc.infotheory import binary_entropy
from seqdisc.model import embed_states
from seqdisc.neumark import (ANCILLA_DIM, ProjectiveStage, build_bob_unitary,
                             build_charlie_unitary)


logger = logbook.Logger('seqdisc.simulator')
run_logger = logbook.Logger('seqdisc.simulator.run')

CHUNK = 2 ** 17
#: Larger ledgers go to memory-mapped ``.npy`` files when a spool directory
#: is given.
SPOOL_THRESHOLD = 10 ** 7
#: Outcome probabilities below this are analytically zero.
PROBABILITY_FLOOR = 1e-24
#: Post-measurement states closer than this (in fidelity) are merged.
FIDELITY_MERGE = 1e-12
SEED_LIMIT = 2 ** 64

FIELDS = ('prepared', 'bob_setup', 'bob_outcome', 'charlie_setup',
          'charlie_outcome')


class Setup(enum.IntEnum):
    NONE = -1
    POVM = 0
    FF1 = 1
    FF2 = 2


@dataclass
class TrialLedger(object):

    """
    Per-trial records of a run, one int8 array per field.

    ``prepared`` is 1 or 2; outcomes are 0 (inconclusive), 1 or 2 (the state
    identified); setups are :class:`Setup` values. A run without Charlie
    records ``Setup.NONE`` and outcome -1 for him.
    """

    n: int
    seed: int
    prepared: np.ndarray
    bob_setup: np.ndarray
    bob_outcome: np.ndarray
    charlie_setup: np.ndarray
    charlie_outcome: np.ndarray

    @property
    def has_charlie(self):
        return bool(self.n) and int(self.charlie_setup[0]) != Setup.NONE

    def records(self):
        """Yield ``(trial, prepared, bob_setup, bob_outcome, charlie_setup, charlie_outcome)``."""
        columns = [getattr(self, name) for name in FIELDS]
        for trial in range(self.n):
            yield (trial,) + tuple(int(column[trial]) for column in columns)

    def identical(self, other):
        return self.n == other.n and all(
            np.array_equal(getattr(self, name), getattr(other, name))
            for name in FIELDS)

    def misidentifications(self):
        """Conclusive outcomes naming the wrong state; always 0."""
        wrong = 3 - self.prepared
        return int(np.count_nonzero(self.bob_outcome == wrong) +
                   np.count_nonzero(self.charlie_outcome == wrong))


## Transition tables

class _Nodes(object):

    """The distinct qubit states met so far, merged by fidelity."""

    def __init__(self, states=()):
        self.states = []
        for state in states:
            self.index(state)

    def index(self, state):
        if not np.any(state):
            return 0
        for i, known in enumerate(self.states):
            if abs(abs(np.vdot(known, state)) ** 2 - 1.0) < FIDELITY_MERGE:
                return i
        self.states.append(np.asarray(state))
        return len(self.states) - 1

    def __len__(self):
        return len(self.states)


def _tabulate(stages, inputs, outputs):

    """
    Tabulate `stages` on every state of `inputs`.

    Returns ``(probabilities, successors)`` of shapes ``(nodes, setups, 3)``;
    post-measurement states are registered in `outputs`.
    """

    shape = (len(inputs), len(stages), ANCILLA_DIM)
    probabilities = np.zeros(shape)
    successors = np.zeros(shape, dtype=np.int64)
    for node, state in enumerate(inputs.states):
        for k, stage in enumerate(stages):
            p, post = stage.branches(state)
            p = np.where(p < PROBABILITY_FLOOR, 0.0, p)
            probabilities[node, k] = p / p.sum()
            for outcome in range(ANCILLA_DIM):
                successors[node, k, outcome] = (
                    outputs.index(post[outcome]) if p[outcome] else 0)
    return probabilities, successors


@dataclass(frozen=True)
class _Chain(object):
    eta1: float
    bob_codes: tuple
    bob_table: tuple
    charlie_codes: tuple
    charlie_table: tuple
    c: float


def _sample_setup(rng, codes, c, m):
    if len(codes) == 1:
        return np.zeros(m, dtype=np.int64)
    # Index 0 is setup 1, chosen with probability c.
    return (rng.random(m) >= c).astype(np.int64)


def _sample_outcome(rng, table, nodes, setups):
    probabilities, successors = table
    p = probabilities[nodes, setups]
    # Thresholds past which outcome 1 (resp. 2) is drawn; impossible
    # outcomes get an infinite threshold so rounding never selects them.
    first = np.where(p[:, 1] + p[:, 2] > 0.0, p[:, 0], np.inf)
    second = np.where(p[:, 2] > 0.0, p[:, 0] + p[:, 1], np.inf)
    u = rng.random(len(nodes))
    outcome = ((u >= first).astype(np.int64) +
               (u >= second).astype(np.int64))
    return outcome, successors[nodes, setups, outcome]


def _run_chunk(chain, rng, m):
    prepared = np.where(rng.random(m) < chain.eta1, 1, 2)
    nodes = prepared - 1
    bob_k = _sample_setup(rng, chain.bob_codes, chain.c, m)
    bob_outcome, nodes = _sample_outcome(rng, chain.bob_table, nodes, bob_k)
    record = {
        'prepared': prepared,
        'bob_setup': np.array(chain.bob_codes)[bob_k],
        'bob_outcome': bob_outcome,
    }
    if chain.charlie_codes:
        charlie_k = _sample_setup(rng, chain.charlie_codes, chain.c, m)
        charlie_outcome, _ = _sample_outcome(rng, chain.charlie_table, nodes,
                                             charlie_k)
        record['charlie_setup'] = np.array(chain.charlie_codes)[charlie_k]
        record['charlie_outcome'] = charlie_outcome
    else:
        record['charlie_setup'] = np.full(m, int(Setup.NONE))
        record['charlie_outcome'] = np.full(m, -1)
    return record


def _allocate(n, spool_dir):
    if spool_dir is not None and n > SPOOL_THRESHOLD:
        os.makedirs(spool_dir, exist_ok=True)
        run_logger.info("Spooling {0} trials to {1}", n, spool_dir)
        return {name: np.lib.format.open_memmap(
                    os.path.join(spool_dir, name + '.npy'), mode='w+',
                    dtype=np.int8, shape=(n,))
                for name in FIELDS}
    return {name: np.empty(n, dtype=np.int8) for name in FIELDS}


def _check_run(n, seed):
    if int(n) < 1:
        raise OutOfRange("a run needs at least one trial, not %r" % (n,))
    if not (0 <= int(seed) < SEED_LIMIT):
        raise OutOfRange("seed %r outside [0, 2^64)" % (seed,))
    return int(n), int(seed)


def _execute(chain, n, seed, spool_dir=None, workers=None):
    n, seed = _check_run(n, seed)
    columns = _allocate(n, spool_dir)
    chunks = math.ceil(n / CHUNK)
    streams = np.random.SeedSequence(seed).spawn(chunks)

    def work(index):
        start = index * CHUNK
        stop = min(n, start + CHUNK)
        rng = np.random.Generator(np.random.Philox(streams[index]))
        record = _run_chunk(chain, rng, stop - start)
        for name in FIELDS:
            columns[name][start:stop] = record[name]

    run_logger.info("Running {0} trials (seed {1}) in {2} chunks",
                    n, seed, chunks)
    run_partitioned(work, range(chunks), workers=workers)
    for column in columns.values():
        if isinstance(column, np.memmap):
            column.flush()
    return TrialLedger(n=n, seed=seed, **columns)


def _sequential_chain(problem, bob_stages, charlie_stages, codes, c):
    alice = _Nodes(embed_states(problem.s))
    middle = _Nodes()
    bob_table = _tabulate(bob_stages, alice, middle)
    charlie_table = _tabulate(charlie_stages, middle, _Nodes())
    logger.debug("Tabulated {0} setups over {1} intermediate states",
                 len(codes), len(middle))
    return _Chain(eta1=problem.eta1, bob_codes=codes, bob_table=bob_table,
                  charlie_codes=codes, charlie_table=charlie_table, c=c)


## Runs

def run_sequential(problem, strategy, n, seed, spool_dir=None, workers=None):

    """
    Simulate `n` rounds with both observers using `strategy`.

    :param seed: any integer in ``[0, 2^64)``; equal seeds give identical
        ledgers.
    :param spool_dir: where to memory-map ledgers above
        :data:`SPOOL_THRESHOLD` trials.
    """

    chain = _sequential_chain(problem,
                              [build_bob_unitary(problem, strategy)],
                              [build_charlie_unitary(problem, strategy)],
                              (Setup.POVM,), 1.0)
    return _execute(chain, n, seed, spool_dir, workers)


def run_flipflop_sequential(problem, ff, n, seed, spool_dir=None,
                            workers=None):

    """
    Simulate `n` rounds with Bob and Charlie each flip-flopping independently.

    Setup 1 (rate ``c``) is the boundary strategy that never identifies the
    first state; setup 2 never identifies the second.
    """

    setups = optimizers.ff_setups(problem)
    chain = _sequential_chain(
        problem,
        [build_bob_unitary(problem, setup) for setup in setups],
        [build_charlie_unitary(problem, setup) for setup in setups],
        (Setup.FF1, Setup.FF2), ff.c)
    return _execute(chain, n, seed, spool_dir, workers)


def run_flipflop_single(problem, ff, n, seed, spool_dir=None, workers=None):

    """
    Simulate `n` rounds of a lone flip-flop observer measuring projectively.

    Setup 1 projects on the first state (a click there is inconclusive, the
    orthogonal click identifies state 2); setup 2 is the mirror image.
    """

    states = embed_states(problem.s)
    stages = [ProjectiveStage(failing=states.psi1, identified=2),
              ProjectiveStage(failing=states.psi2, identified=1)]
    table = _tabulate(stages, _Nodes(states), _Nodes())
    chain = _Chain(eta1=problem.eta1, bob_codes=(Setup.FF1, Setup.FF2),
                   bob_table=table, charlie_codes=(), charlie_table=None,
                   c=ff.c)
    return _execute(chain, n, seed, spool_dir, workers)


## Statistics

@dataclass(frozen=True)
class Estimate(object):

    """A binomial frequency with its standard error."""

    value: float
    stderr: float
    n: int

    @classmethod
    def of(cls, hits, n):
        if n == 0:
            return cls(value=float('nan'), stderr=float('nan'), n=0)
        p = hits / n
        return cls(value=p, stderr=math.sqrt(p * (1 - p) / n), n=n)

    def z(self, reference):
        """Standard score of `reference` against this estimate."""
        if self.stderr > 0.0:
            return (self.value - reference) / self.stderr
        return 0.0 if abs(self.value - reference) < 1e-15 else math.inf


@dataclass(frozen=True)
class SimulationStats(object):

    """
    Frequencies estimated from a ledger.

    ``rates`` maps ``bob_success``, ``charlie_success``, ``p_ss``, ``p_ff``
    and the per-state conditional success rates ``p1b``, ``p2b``, ``p1c``,
    ``p2c`` to :class:`Estimate` objects (Charlie's entries are absent for
    single-observer ledgers). ``mi`` holds plug-in information estimates
    (bits) for ``ab``, ``ac`` and ``bc``.
    """

    n: int
    rates: dict
    mi: dict
    misidentifications: int

    def z_scores(self, reference):
        return {name: self.rates[name].z(value)
                for name, value in sorted(reference.items())
                if name in self.rates}


def _plugin_information(prepared, conclusive, n):
    hits = int(np.count_nonzero(conclusive))
    if hits == 0:
        return 0.0
    ones = int(np.count_nonzero(prepared[conclusive] == 1))
    return hits / n * binary_entropy(ones / hits)


def empirical_stats(ledger):

    """Estimate every rate of a ledger, with binomial standard errors."""

    n = ledger.n
    if n < 1:
        raise OutOfRange("cannot estimate rates from an empty ledger")
    prepared = ledger.prepared
    bob = ledger.bob_outcome > 0
    by_state = [prepared == 1, prepared == 2]

    rates = {'bob_success': Estimate.of(np.count_nonzero(bob), n)}
    for i, mask in enumerate(by_state, start=1):
        rates['p%db' % i] = Estimate.of(np.count_nonzero(bob & mask),
                                        np.count_nonzero(mask))
    mi = {'ab': _plugin_information(prepared, bob, n)}

    if ledger.has_charlie:
        charlie = ledger.charlie_outcome > 0
        rates['charlie_success'] = Estimate.of(np.count_nonzero(charlie), n)
        rates['p_ss'] = Estimate.of(np.count_nonzero(bob & charlie), n)
        rates['p_ff'] = Estimate.of(np.count_nonzero(~bob & ~charlie), n)
        for i, mask in enumerate(by_state, start=1):
            rates['p%dc' % i] = Estimate.of(np.count_nonzero(charlie & mask),
                                            np.count_nonzero(mask))
        mi['ac'] = _plugin_information(prepared, charlie, n)
        mi['bc'] = _plugin_information(prepared, bob & charlie, n)

    return SimulationStats(n=n, rates=rates, mi=mi,
                           misidentifications=ledger.misidentifications())


def _stage_rates(problem, q1b, q2b, q1c=None, q2c=None):
    eta1, eta2 = problem.eta1, problem.eta2
    rates = {'p1b': 1 - q1b, 'p2b': 1 - q2b,
             'bob_success': eta1 * (1 - q1b) + eta2 * (1 - q2b)}
    if q1c is not None:
        rates.update(p1c=1 - q1c, p2c=1 - q2c,
                     charlie_success=eta1 * (1 - q1c) + eta2 * (1 - q2c))
    return rates


def reference_rates(problem, strategy=None, ff=None, single=False):

    """
    The analytic value of every rate :func:`empirical_stats` estimates.

    Pass a :class:`~seqdisc.model.SequentialStrategy`, or a flip-flop
    strategy `ff` (with ``single=True`` for the lone projective observer).
    """

    if strategy is not None:
        rates = _stage_rates(problem, *strategy.bob_failures(),
                             *strategy.charlie_failures())
        rates['p_ss'] = optimizers.joint_success(problem, strategy)
        rates['p_ff'] = optimizers.joint_failure(problem, strategy)
        return rates
    if ff is None:
        raise OutOfRange("reference rates need a strategy or a flip-flop rate")
    if single:
        q1, q2, _ = optimizers.ff_single(problem, ff)
        return _stage_rates(problem, q1, q2)
    rates = _stage_rates(problem, *optimizers.ff_stage_failures(problem, ff))
    rates['p_ss'] = optimizers.ff_sequential_joint(problem, ff)
    rates['p_ff'] = optimizers.ff_sequential_failure(problem, ff)
    return rates


## Sifting

@dataclass(frozen=True)
class KeyBundle(object):

    """
    Raw keys left after the observers announce which rounds were conclusive.

    Bits encode the identified state (state 1 is bit 0). ``rates``,
    ``balance`` and ``n_conclusive`` are keyed by ``ab``, ``ac`` and ``abc``;
    a balance (fraction of 1 bits) is ``nan`` for an empty key. ``errors``
    counts key bits that disagree with Alice's record.
    """

    key_ab: str
    key_ac: str
    key_abc: str
    rates: dict
    balance: dict
    n_conclusive: dict
    errors: int

    def keys(self):
        return {'ab': self.key_ab, 'ac': self.key_ac, 'abc': self.key_abc}


def _bits(outcomes):
    return ''.join(np.where(outcomes == 2, '1', '0'))


def sift_keys(ledger):

    """
    Sift the raw keys of a ledger.

    ``key_ab`` keeps the rounds where Bob was conclusive, ``key_ac`` those
    where Charlie was, and ``key_abc`` the rounds where both were.
    """

    n = ledger.n
    if n < 1:
        raise OutOfRange("cannot sift keys from an empty ledger")
    bob = ledger.bob_outcome > 0
    charlie = ledger.charlie_outcome > 0
    both = bob & charlie
    selections = {
        'ab': (bob, ledger.bob_outcome),
        'ac': (charlie, ledger.charlie_outcome),
        'abc': (both, ledger.bob_outcome),
    }

    keys, rates, balance, counts = {}, {}, {}, {}
    errors = 0
    for name, (mask, outcomes) in selections.items():
        chosen = outcomes[mask]
        keys[name] = _bits(chosen)
        counts[name] = int(chosen.size)
        rates[name] = chosen.size / n
        balance[name] = (float(np.mean(chosen == 2)) if chosen.size
                         else float('nan'))
        errors += int(np.count_nonzero(chosen != ledger.prepared[mask]))
    logger.debug("Sifted keys of lengths {0!r}", counts)
    return KeyBundle(key_ab=keys['ab'], key_ac=keys['ac'],
                     key_abc=keys['abc'], rates=rates, balance=balance,
                     n_conclusive=counts, errors=errors)
