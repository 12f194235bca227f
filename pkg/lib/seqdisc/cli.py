"""
Command-line front-end.

    seqdisc optimize --s 0.1 --eta1 0.5 --scheme success-only
    seqdisc sweep --axis c --s 0.25 --output sweep.csv
    seqdisc simulate --s 0.25 --trials 1000000 --seed 42 --output run/
    seqdisc qkd --scheme flip-flop --c 0.5 --output keys/
    seqdisc figure fig2 --output fig2.csv

Exit status is 0 on success, 2 for bad usage or parameters and 3 for
numerical or I/O failures.
"""

import argparse
from contextlib import contextmanager
import os
import sys

import logbook

from seqdisc import export, infotheory, optimizers, simulator
from seqdisc.config import AXES, FORMATS, SCHEMES, RunConfig
from seqdisc.exceptions import SeqDiscError
from seqdisc.figures import build_figure, build_sweep
from seqdisc.model import make_problem, make_strategy
from seqdisc.neumark import (build_bob_unitary, build_charlie_unitary,
                             unitarity_defect)
from seqdisc.optimizers import FlipFlopStrategy


logger = logbook.Logger('seqdisc.cli')
run_logger = logbook.Logger('seqdisc.cli.run')


## Output

@contextmanager
def open_output(path, name=None):

    """
    Yield a text stream for `path`: stdout for ``None`` or ``-``, a file
    otherwise. With `name`, `path` is a directory and the file is created in
    it.
    """

    if path in (None, '-'):
        yield sys.stdout
        return
    if name is not None:
        os.makedirs(path, exist_ok=True)
        path = os.path.join(path, name)
    with open(path, 'w', encoding='utf-8', newline='') as stream:
        yield stream
    run_logger.info("Wrote {0}", path)


def write_table(config, columns, rows):
    with open_output(config.output) as stream:
        if config.output_format == 'json':
            export.write_json(stream, [dict(zip(columns, row)) for row in rows])
        else:
            export.write_csv(stream, columns, rows)


def _flatten(document, prefix=''):
    for key, value in sorted(document.items()):
        name = prefix + str(key)
        if isinstance(value, dict):
            for item in _flatten(value, name + '.'):
                yield item
        elif isinstance(value, list):
            yield name, ' '.join(str(v) for v in export.plain(value))
        else:
            yield name, value


def write_document(config, document, name=None):
    with open_output(config.output, name) as stream:
        if config.output_format == 'csv' and name is None:
            export.write_csv(stream, ['key', 'value'],
                             _flatten(export.plain(document)))
        else:
            export.write_json(stream, document)


## Strategies

def _flipflop(config, problem):
    # The balanced rate c = eta1 is the default.
    return FlipFlopStrategy(problem.eta1 if config.c is None else config.c)


def _optimum(config, problem):

    """
    The strategy the command should use: explicit, or the scheme's optimum.

    :returns: ``(strategy, result)``; `result` is ``None`` for an explicit
        strategy.
    """

    if config.explicit_strategy:
        return make_strategy(problem, config.t, config.q1b, config.q1c), None
    if config.scheme == 'success-only':
        result = optimizers.optimize_success_only(problem)
    else:
        result = optimizers.optimize_minfail_success(problem)
    return result.strategy, result


def _observer_information(problem, q1b, q2b, q1c, q2c):
    return {
        'guessing_ab': infotheory.mi_guessing(problem, q1b, q2b),
        'guessing_ac': infotheory.mi_guessing(problem, q1c, q2c),
        'usd_ab': infotheory.mi_usd_observer(problem, q1b, q2b),
        'usd_ac': infotheory.mi_usd_observer(problem, q1c, q2c),
    }


def _unitaries(problem, strategy):
    bob = build_bob_unitary(problem, strategy)
    charlie = build_charlie_unitary(problem, strategy)
    return {'bob': bob.to_pairs(), 'charlie': charlie.to_pairs(),
            'bob_defect': unitarity_defect(bob),
            'charlie_defect': unitarity_defect(charlie)}


## Commands

def cmd_optimize(config):

    """Write the optimal strategy with its joint rates and information."""

    problem = make_problem(config.s, config.eta1)
    document = {'problem': problem, 'scheme': config.scheme}

    if config.scheme == 'flip-flop' and not config.explicit_strategy:
        ff = _flipflop(config, problem)
        q1, q2, p_succ = optimizers.ff_single(problem, ff)
        stages = optimizers.ff_stage_failures(problem, ff)
        mi = _observer_information(problem, *stages)
        mi['usd_bc'] = (infotheory.mi_ff_bc(problem, ff, problem.s ** 0.5)
                        if problem.s > 0 else None)
        document.update(
            flip_flop=ff, stage_failures=dict(zip(
                ('q1b', 'q2b', 'q1c', 'q2c'), stages)),
            single={'q1': q1, 'q2': q2, 'p_succ': p_succ},
            p_ss=optimizers.ff_sequential_joint(problem, ff),
            p_ff=optimizers.ff_sequential_failure(problem, ff), mi=mi)
        if config.dump_unitaries and problem.s > 0:
            document['unitaries'] = [_unitaries(problem, setup)
                                     for setup in optimizers.ff_setups(problem)]
    else:
        strategy, result = _optimum(config, problem)
        mi = _observer_information(problem, *strategy.bob_failures(),
                                   *strategy.charlie_failures())
        mi['usd_bc'] = infotheory.mi_usd_bc(problem, strategy).mi
        document.update(
            strategy=strategy, result=result, mi=mi,
            p_ss=optimizers.joint_success(problem, strategy),
            p_ff=optimizers.joint_failure(problem, strategy),
            p_ff_bound=optimizers.min_joint_failure(problem)[1])
        if config.scheme == 'success-only':
            document['critical_overlap'] = optimizers.critical_overlap(
                problem.eta1)
        if config.dump_unitaries:
            document['unitaries'] = _unitaries(problem, strategy)

    write_document(config, document)
    return 0


def cmd_sweep(config):
    write_table(config, *build_sweep(config))
    return 0


def cmd_figure(config):
    write_table(config, *build_figure(config.figure, config.resolution))
    return 0


def run_simulation(config):

    """
    Run the simulation a config asks for.

    :returns: ``(problem, ledger, reference)`` with `reference` the analytic
        rates from :func:`~seqdisc.simulator.reference_rates`.
    """

    problem = make_problem(config.s, config.eta1)
    options = dict(n=config.trials, seed=config.seed,
                   spool_dir=config.spool_dir)
    if config.scheme == 'flip-flop' and not config.explicit_strategy:
        ff = _flipflop(config, problem)
        if config.single:
            ledger = simulator.run_flipflop_single(problem, ff, **options)
        else:
            ledger = simulator.run_flipflop_sequential(problem, ff, **options)
        reference = simulator.reference_rates(problem, ff=ff,
                                              single=config.single)
    else:
        strategy, _ = _optimum(config, problem)
        ledger = simulator.run_sequential(problem, strategy, **options)
        reference = simulator.reference_rates(problem, strategy)
    return problem, ledger, reference


def cmd_simulate(config):

    """Run trials; write the ledger and statistics with z-scores."""

    problem, ledger, reference = run_simulation(config)
    stats = simulator.empirical_stats(ledger)
    z_scores = stats.z_scores(reference)
    rates = {name: {'value': estimate.value, 'stderr': estimate.stderr,
                    'n': estimate.n, 'reference': reference.get(name),
                    'z': z_scores.get(name)}
             for name, estimate in stats.rates.items()}
    document = {'problem': problem, 'scheme': config.scheme,
                'trials': ledger.n, 'seed': ledger.seed, 'rates': rates,
                'mi': stats.mi,
                'misidentifications': stats.misidentifications}
    worst = max((abs(z) for z in z_scores.values()), default=0.0)
    if worst >= 5:
        logger.warning("Largest |z| is {0:.2f}", worst)

    if config.output in (None, '-'):
        write_document(config, document)
    else:
        with open_output(config.output, 'ledger.csv') as stream:
            export.write_ledger(stream, ledger)
        write_document(config, document, 'stats.json')
    return 0


def cmd_qkd(config):

    """Run trials and sift the raw keys."""

    _, ledger, _ = run_simulation(config)
    bundle = simulator.sift_keys(ledger)
    document = export.key_sidecar(bundle)
    if bundle.errors:
        logger.error("{0} key bits disagree with Alice's record",
                     bundle.errors)
    if config.output in (None, '-'):
        write_document(config, dict(document, errors=bundle.errors))
    else:
        export.write_keys(config.output, bundle)
    return 0


COMMANDS = {
    'optimize': cmd_optimize,
    'sweep': cmd_sweep,
    'simulate': cmd_simulate,
    'qkd': cmd_qkd,
    'figure': cmd_figure,
}


## Argument parsing

def _common_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help="flat 'key = value' config file")
    common.add_argument('--s', type=float, help="overlap of the two states")
    common.add_argument('--eta1', type=float, help="prior of the first state")
    common.add_argument('--scheme', choices=SCHEMES)
    common.add_argument('--output', help="output file or directory (default: stdout)")
    common.add_argument('--format', choices=FORMATS)
    common.add_argument('--verbose', action='store_true', default=None)
    return common


def _strategy_flags(parser):
    parser.add_argument('--c', type=float, help="flip-flop rate of setup 1")
    parser.add_argument('--t', type=float, help="explicit intermediate overlap")
    parser.add_argument('--q1b', type=float)
    parser.add_argument('--q1c', type=float)


def build_parser():
    parser = argparse.ArgumentParser(
        prog='seqdisc',
        description="Sequential unambiguous discrimination of two qubit states.")
    commands = parser.add_subparsers(dest='command', required=True)
    common = _common_parser()

    optimize = commands.add_parser('optimize', parents=[common],
                                   help="optimal strategy and its rates")
    _strategy_flags(optimize)
    optimize.add_argument('--dump-unitaries', action='store_true',
                          default=None)

    sweep = commands.add_parser('sweep', parents=[common],
                                help="one-dimensional parameter sweep")
    sweep.add_argument('--axis', choices=AXES)
    sweep.add_argument('--start', type=float)
    sweep.add_argument('--stop', type=float)
    sweep.add_argument('--resolution', type=int)

    for name, text in (('simulate', "Monte Carlo run with statistics"),
                       ('qkd', "Monte Carlo run with key sifting")):
        run = commands.add_parser(name, parents=[common], help=text)
        _strategy_flags(run)
        run.add_argument('--trials', type=int)
        run.add_argument('--seed', type=int)
        run.add_argument('--single', action='store_true', default=None,
                         help="one projective flip-flop observer only")
        run.add_argument('--spool-dir')

    figure = commands.add_parser('figure', parents=[common],
                                 help="dataset behind a figure")
    figure.add_argument('figure', help="fig1 ... fig9 or figff")
    figure.add_argument('--resolution', type=int)
    return parser


def resolve_config(args):
    flags = {key: value for key, value in vars(args).items()
             if key not in ('command', 'config')}
    return RunConfig.resolve(args.command, flags, args.config)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code

    # Raised to DEBUG once a flag or the config file asks for verbose output.
    handler = logbook.StderrHandler(level=logbook.WARNING)
    with logbook.NullHandler().applicationbound(), handler.applicationbound():
        try:
            config = resolve_config(args)
            if config.verbose:
                handler.level = logbook.DEBUG
            return COMMANDS[config.command](config)
        except SeqDiscError as exc:
            print("seqdisc: error: %s" % (exc,), file=sys.stderr)
            return exc.exit_code
        except OSError as exc:
            print("seqdisc: error: %s: %s" % (
                exc.filename or '-', exc.strerror or exc), file=sys.stderr)
            return 3
