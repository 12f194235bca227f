import io
import json

import numpy as np
import pytest

from seqdisc import export, simulator
from seqdisc.exceptions import OutOfRange
from seqdisc.model import Regime, make_problem, symmetric_strategy
from seqdisc.optimizers import FlipFlopStrategy
from seqdisc.simulator import Setup, TrialLedger, sift_keys


def test_plain_converts_results_to_builtins():
    problem = make_problem(0.25, 0.5)
    document = export.plain({
        'problem': problem,
        'strategy': symmetric_strategy(problem, 0.5),
        'regime': Regime.INTERIOR,
        'setup': Setup.FF1,
        'values': np.array([0.5, float('nan')]),
        'count': np.int64(3),
        'flag': np.bool_(True),
        'amplitude': 1 - 2j,
    })
    assert document['problem'] == {'s': 0.25, 'eta1': 0.5}
    assert document['strategy']['q1b'] == 0.5
    assert document['regime'] == 'interior'
    assert document['setup'] == 1
    assert document['values'] == [0.5, None]
    assert document['count'] == 3 and type(document['count']) is int
    assert document['flag'] is True
    assert document['amplitude'] == [1.0, -2.0]


def test_format_cell():
    assert export.format_cell(None) == ''
    assert export.format_cell(0.1) == '0.10000000000000001'
    assert float(export.format_cell(1 / 3)) == 1 / 3
    assert export.format_cell('interior') == 'interior'


def test_write_csv():
    stream = io.StringIO()
    export.write_csv(stream, ['s', 'p_ss', 'regime'],
                     [[0.5, 0.125, 'interior'], [0.75, None, 'boundary-state1']])
    assert stream.getvalue() == (
        's,p_ss,regime\n'
        '0.5,0.125,interior\n'
        '0.75,,boundary-state1\n')


def test_write_json_is_sorted_and_has_no_nan():
    stream = io.StringIO()
    export.write_json(stream, {'b': float('nan'), 'a': 1})
    text = stream.getvalue()
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {'a': 1, 'b': None}


def single_observer_ledger():
    return TrialLedger(
        n=2, seed=5,
        prepared=np.array([1, 2], dtype=np.int8),
        bob_setup=np.array([1, 2], dtype=np.int8),
        bob_outcome=np.array([0, 2], dtype=np.int8),
        charlie_setup=np.full(2, -1, dtype=np.int8),
        charlie_outcome=np.full(2, -1, dtype=np.int8))


def test_single_observer_ledger_leaves_charlie_empty():
    stream = io.StringIO()
    export.write_ledger(stream, single_observer_ledger())
    assert stream.getvalue() == (
        'trial,prepared,bob_setup,bob_outcome,charlie_setup,charlie_outcome\n'
        '0,1,FF1,0,,\n'
        '1,2,FF2,2,,\n')


def test_sequential_ledger_reads_back_unchanged():
    problem = make_problem(0.25, 0.5)
    ledger = simulator.run_sequential(
        problem, symmetric_strategy(problem, 0.5), 500, 21)
    stream = io.StringIO()
    export.write_ledger(stream, ledger)
    stream.seek(0)
    read = export.read_ledger(stream, seed=21)
    assert read.identical(ledger)
    assert list(read.records()) == list(ledger.records())
    assert set(stream.getvalue().splitlines()[1].split(',')[2::2]) == {'POVM'}


def test_flipflop_ledgers_read_back_unchanged():
    problem = make_problem(0.4, 0.6)
    ff = FlipFlopStrategy(0.3)
    for ledger in (simulator.run_flipflop_sequential(problem, ff, 300, 2),
                   simulator.run_flipflop_single(problem, ff, 300, 2),
                   single_observer_ledger()):
        stream = io.StringIO()
        export.write_ledger(stream, ledger)
        stream.seek(0)
        read = export.read_ledger(stream)
        assert read.identical(ledger)
        assert read.has_charlie == ledger.has_charlie


@pytest.mark.parametrize('text', [
    'trial,prepared\n',
    'trial,prepared,bob_setup,bob_outcome,charlie_setup,charlie_outcome\n'
    '0,1,SOMETHING,0,,\n',
    'trial,prepared,bob_setup,bob_outcome,charlie_setup,charlie_outcome\n'
    '3,1,FF1,0,,\n',
])
def test_malformed_ledgers_are_rejected(text):
    with pytest.raises(OutOfRange):
        export.read_ledger(io.StringIO(text))


def test_write_keys(tmpdir):
    bundle = sift_keys(single_observer_ledger())
    text_path, json_path = export.write_keys(str(tmpdir.join('keys')), bundle)
    with open(text_path) as stream:
        assert stream.read() == '1\n\n\n'
    with open(json_path) as stream:
        sidecar = json.load(stream)
    assert sidecar['ab'] == {'rate': 0.5, 'balance': 1.0, 'n_conclusive': 1}
    assert sidecar['abc']['balance'] is None
