"""
Datasets behind every plot, as ``(columns, rows)`` tables.

Figures are registered by id in :data:`figures` and take a resolution;
one-dimensional sweeps are registered by axis in :data:`sweeps` and take a
:class:`~seqdisc.config.RunConfig`. Cells that have no value (a parameter
outside its physical range) are ``None`` and come out empty in CSV.
"""

import math

import logbook
import numpy as np

from seqdisc import infotheory, optimizers
from seqdisc.config import DEFAULT_RESOLUTION
from seqdisc.exceptions import OutOfRange
from seqdisc.model import make_problem, symmetric_strategy
from seqdisc.optimizers import FlipFlopStrategy
from seqdisc.registry import Registry


logger = logbook.Logger('seqdisc.figures')

figures = Registry()
sweeps = Registry()

#: fig3 is a two-dimensional grid; its default is per axis.
DEFAULT_RESOLUTIONS = {'fig3': 101}

CURVE_OVERLAPS = (0.1, 0.25, 0.4, 0.7)
CURVE_PRIORS = (0.5, 1.0 / 3.0, 0.25)


def default_resolution(figure_id):
    return DEFAULT_RESOLUTIONS.get(figure_id, DEFAULT_RESOLUTION)


def build_figure(figure_id, resolution=None):
    """Dispatch to a registered figure; unknown ids raise ``UnknownFigure``."""
    if resolution is None:
        resolution = default_resolution(figure_id)
    columns, rows = figures(figure_id, int(resolution))
    logger.info("Built {0}: {1} rows", figure_id, len(rows))
    return columns, rows


def overlap_axis(resolution):
    return np.linspace(0.0, 1.0, resolution, endpoint=False)


def _prior_label(eta1):
    return '%.3g' % eta1


## Joint success

@figures.builder(name='fig1')
def success_vs_q1b(resolution):
    """P_ss on the symmetric family vs q1b, equal priors."""
    overlaps = (0.1, 0.2, 0.25, 0.4)
    columns = ['q1b'] + ['p_ss_s%g' % s for s in overlaps]
    rows = []
    for q in np.linspace(0.0, 1.0, resolution):
        row = [q]
        for s in overlaps:
            problem = make_problem(s, 0.5)
            row.append(optimizers.success_single(problem, q) if q >= s
                       else None)
        rows.append(row)
    return columns, rows


@figures.builder(name='fig2')
def optimal_success_vs_s(resolution):

    """
    Optimal P_ss vs s at equal priors, with the interior and boundary
    curves. The row at the critical overlap is always included.
    """

    s_c = optimizers.critical_overlap(0.5)
    grid = sorted(set(overlap_axis(resolution).tolist()) | {s_c})
    rows = []
    for s in grid:
        interior = (1 - math.sqrt(s)) ** 2
        boundary = 0.5 * (1 - s) ** 2
        if s == 0.0:
            optimum = 1.0
        else:
            optimum = optimizers.optimize_success_only(
                make_problem(s, 0.5)).p_ss
        rows.append([s, interior, boundary, optimum])
    return ['s', 'p_ss_interior', 'p_ss_boundary', 'p_ss_opt'], rows


@figures.builder(name='fig3')
def success_contours(resolution):

    """
    P_ss on the symmetric family over the (q1b, q2b) square, for equal and
    3:2 priors, with the product q1b q2b whose level sets are the
    constraint curves.
    """

    axis = np.linspace(0.0, 1.0, resolution)
    rows = []
    for q1b in axis:
        for q2b in axis:
            rows.append([q1b, q2b, q1b * q2b,
                         0.5 * (1 - q1b) ** 2 + 0.5 * (1 - q2b) ** 2,
                         0.6 * (1 - q1b) ** 2 + 0.4 * (1 - q2b) ** 2])
    return ['q1b', 'q2b', 'product', 'p_ss_eta0.5', 'p_ss_eta0.6'], rows


@figures.builder(name='fig4')
def critical_overlap_vs_prior(resolution):
    rows = [[eta1, optimizers.critical_overlap(eta1)]
            for eta1 in np.linspace(0.01, 0.99, resolution)]
    return ['eta1', 's_c'], rows


## Alice and Bob

@figures.builder(name='fig5')
def information_vs_q1(resolution):
    """Guessing and conclusive-only A:B information vs q1, equal priors."""
    columns = ['q1']
    for s in CURVE_OVERLAPS:
        columns += ['i_guessing_s%g' % s, 'i_usd_s%g' % s]
    rows = []
    for q1 in np.linspace(0.0, 1.0, resolution):
        row = [q1]
        for s in CURVE_OVERLAPS:
            problem = make_problem(s, 0.5)
            if q1 < s * s:
                row += [None, None]
                continue
            row += [infotheory.mi_guessing(problem, q1, s * s / q1),
                    infotheory.mi_usd_ab(problem, q1).mi]
        rows.append(row)
    return columns, rows


def _usd_ab_optimum(s, eta1):
    if s == 0.0:
        return infotheory.binary_entropy(eta1), 0.0
    report = infotheory.optimize_mi_usd_ab(make_problem(s, eta1))
    return report.mi, report.optimizer_arg


@figures.builder(name='fig6')
def optimal_usd_ab_vs_s(resolution):
    """Maximal A:B information, its q1, and the q1 = s approximation."""
    columns = ['s']
    for eta1 in CURVE_PRIORS:
        label = _prior_label(eta1)
        columns += ['i_usd_max_eta' + label, 'q1_opt_eta' + label,
                    'q1_opt_minus_s_eta' + label, 'i_approx_eta' + label]
    rows = []
    for s in overlap_axis(resolution):
        row = [s]
        for eta1 in CURVE_PRIORS:
            mi, q1 = _usd_ab_optimum(s, eta1)
            row += [mi, q1, q1 - s, (1 - s) * infotheory.binary_entropy(eta1)]
        rows.append(row)
    return columns, rows


## Bob and Charlie

@figures.builder(name='fig7')
def usd_bc_vs_q1b(resolution):
    """B:C information on the symmetric family vs q1b, equal priors."""
    columns = ['q1b'] + ['i_bc_s%g' % s for s in CURVE_OVERLAPS]
    rows = []
    for q in np.linspace(0.0, 1.0, resolution):
        row = [q]
        for s in CURVE_OVERLAPS:
            problem = make_problem(s, 0.5)
            row.append(infotheory.mi_usd_bc(
                problem, symmetric_strategy(problem, q)).mi if q >= s
                else None)
        rows.append(row)
    return columns, rows


@figures.builder(name='fig8')
def optimal_usd_bc_vs_s(resolution):
    """Maximal B:C information, the shift of its q1b from sqrt(s), and the approximation."""
    columns = ['s']
    for eta1 in CURVE_PRIORS:
        label = _prior_label(eta1)
        columns += ['i_bc_max_eta' + label,
                    'sqrt_s_minus_q1b_opt_eta' + label,
                    'i_approx_eta' + label]
    rows = []
    for s in overlap_axis(resolution):
        row = [s]
        for eta1 in CURVE_PRIORS:
            entropy = infotheory.binary_entropy(eta1)
            if s == 0.0:
                row += [entropy, 0.0, entropy]
                continue
            report = infotheory.optimize_mi_usd_bc(make_problem(s, eta1))
            row += [report.mi, math.sqrt(s) - report.optimizer_arg,
                    (1 - math.sqrt(s)) ** 2 * entropy]
        rows.append(row)
    return columns, rows


## Flip-flop and comparison

@figures.builder(name='figff')
def optimal_flipflop_vs_s(resolution):
    columns = ['s']
    for eta1 in CURVE_PRIORS:
        label = _prior_label(eta1)
        columns += ['i_ff_max_eta' + label, 'c_opt_eta' + label]
    rows = []
    for s in overlap_axis(resolution):
        row = [s]
        for eta1 in CURVE_PRIORS:
            report = infotheory.optimize_mi_ff_ab(make_problem(s, eta1))
            row += [report.mi, report.optimizer_arg]
        rows.append(row)
    return columns, rows


@figures.builder(name='fig9')
def strategy_comparison(resolution):
    """A:B information of four strategies vs s, equal priors."""
    rows = []
    for s in overlap_axis(resolution):
        problem = make_problem(s, 0.5)
        rows.append([
            s,
            infotheory.helstrom_mi(problem),
            infotheory.mi_guessing(problem, 1.0, s * s),
            _usd_ab_optimum(s, 0.5)[0],
            infotheory.optimize_mi_ff_ab(problem).mi,
        ])
    return ['s', 'i_helstrom', 'i_boundary_guessing', 'i_usd_max',
            'i_ff_max'], rows


## Sweeps

SWEEP_RANGES = {
    's': (0.01, 0.99),
    'eta1': (0.01, 0.99),
    'q1b': (None, 1.0),
    'c': (0.0, 1.0),
}


def sweep_axis(config):
    """The grid a sweep runs over: ``resolution`` points, ends included."""
    lo, hi = SWEEP_RANGES[config.axis]
    if lo is None:
        lo = config.s
    start = lo if config.start is None else config.start
    stop = hi if config.stop is None else config.stop
    resolution = config.resolution or DEFAULT_RESOLUTION
    if not start < stop:
        raise OutOfRange("empty sweep range [%r, %r]" % (start, stop))
    return np.linspace(start, stop, resolution)


def build_sweep(config):
    columns, rows = sweeps(config.axis, config)
    logger.info("Swept {0}: {1} rows", config.axis, len(rows))
    return columns, rows


def _optimum_row(problem):
    minfail = optimizers.optimize_minfail_success(problem)
    success = optimizers.optimize_success_only(problem)
    return [minfail.p_ff, minfail.p_ss, minfail.regime.value, success.p_ss,
            success.regime.value,
            infotheory.optimize_mi_usd_ab(problem).mi,
            infotheory.optimize_mi_usd_bc(problem).mi,
            infotheory.optimize_mi_ff_ab(problem).mi]


OPTIMUM_COLUMNS = ['p_ff_opt', 'p_ss_minfail', 'regime_minfail',
                   'p_ss_success_only', 'regime_success_only',
                   'i_usd_ab_max', 'i_usd_bc_max', 'i_ff_ab_max']


@sweeps.builder(name='s')
def sweep_overlap(config):
    rows = [[s] + _optimum_row(make_problem(s, config.eta1))
            for s in sweep_axis(config)]
    return ['s'] + OPTIMUM_COLUMNS, rows


@sweeps.builder(name='eta1')
def sweep_prior(config):
    rows = [[eta1] + _optimum_row(make_problem(config.s, eta1)) +
            [optimizers.critical_overlap(eta1)]
            for eta1 in sweep_axis(config)]
    return ['eta1'] + OPTIMUM_COLUMNS + ['s_c'], rows


@sweeps.builder(name='q1b')
def sweep_q1b(config):
    """P_ss and B:C information along the symmetric family."""
    problem = make_problem(config.s, config.eta1)
    rows = []
    for q in sweep_axis(config):
        strategy = symmetric_strategy(problem, q)
        rows.append([q, optimizers.joint_success(problem, strategy),
                     optimizers.joint_failure(problem, strategy),
                     infotheory.mi_usd_bc(problem, strategy).mi])
    return ['q1b', 'p_ss', 'p_ff', 'i_usd_bc'], rows


@sweeps.builder(name='c')
def sweep_flipping_rate(config):
    """Flip-flop rates and information vs c."""
    problem = make_problem(config.s, config.eta1)
    t = math.sqrt(problem.s)
    rows = []
    for c in sweep_axis(config):
        ff = FlipFlopStrategy(float(c))
        row = [c, optimizers.ff_single(problem, ff)[2],
               optimizers.ff_sequential_joint(problem, ff),
               optimizers.ff_sequential_failure(problem, ff),
               infotheory.mi_ff_ab(problem, ff).mi]
        row.append(infotheory.mi_ff_bc(problem, ff, t) if t > 0 else None)
        rows.append(row)
    return ['c', 'p_succ_single', 'p_ss', 'p_ff', 'i_ff_ab', 'i_ff_bc'], rows
