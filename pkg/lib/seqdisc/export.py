"""
Writers for everything the command line emits, and a reader for trial ledgers.

CSV cells carry 17 significant digits, so every float reads back exactly.
JSON is UTF-8 with sorted keys; ``nan`` is written as ``null``.
"""

import csv
import dataclasses
import enum
import json
import math
import os

import logbook
import numpy as np

from seqdisc.exceptions import OutOfRange
from seqdisc.simulator import FIELDS, Setup, TrialLedger


logger = logbook.Logger('seqdisc.export')

FLOAT_FORMAT = '%.17g'
LEDGER_HEADER = ('trial', 'prepared', 'bob_setup', 'bob_outcome',
                 'charlie_setup', 'charlie_outcome')


def plain(value):

    """
    Convert results into JSON-ready builtins.

    Dataclasses become dicts, enums their values, numpy scalars and arrays
    Python numbers and lists, and non-finite floats ``None``.
    """

    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {field.name: plain(getattr(value, field.name))
                for field in dataclasses.fields(value)}
    if isinstance(value, enum.Enum):
        return value.value if not isinstance(value, int) else int(value)
    if isinstance(value, dict):
        return {str(key): plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def format_cell(value):
    if value is None:
        return ''
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % value
    return str(value)


def write_csv(stream, columns, rows):
    """Write a header and `rows` (sequences matching `columns`) to `stream`."""
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(value) for value in row])


def write_json(stream, document):
    json.dump(plain(document), stream, sort_keys=True, indent=2,
              ensure_ascii=False, allow_nan=False)
    stream.write('\n')


def _ledger_cell(field, value):
    # Missing setups and Charlie's fields in single-observer runs are -1.
    if value < 0:
        return ''
    if field.endswith('_setup'):
        return Setup(value).name
    return str(value)


def write_ledger(stream, ledger):

    """
    Write a :class:`~seqdisc.simulator.TrialLedger` as CSV.

    Setups are written by name (``POVM``, ``FF1``, ``FF2``) and outcomes as
    0 (inconclusive), 1 or 2. Charlie's columns are empty in single-observer
    runs.
    """

    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(LEDGER_HEADER)
    for record in ledger.records():
        writer.writerow([record[0]] + [_ledger_cell(field, value) for
                                       field, value in zip(FIELDS, record[1:])])


def _parse_ledger_cell(field, text):
    if text == '':
        return Setup.NONE.value
    if field.endswith('_setup'):
        return Setup[text].value
    return int(text)


def read_ledger(stream, seed=None):

    """
    Read a ledger written by :func:`write_ledger` back into a
    :class:`~seqdisc.simulator.TrialLedger`. The seed is not part of the CSV.

    :raises OutOfRange: for a wrong header or malformed rows.
    """

    reader = csv.reader(stream)
    if tuple(next(reader, ())) != LEDGER_HEADER:
        raise OutOfRange("not a trial ledger: unexpected header")
    columns = {field: [] for field in FIELDS}
    for number, row in enumerate(reader):
        if len(row) != len(LEDGER_HEADER) or row[0] != str(number):
            raise OutOfRange("malformed ledger row %d: %r" % (number, row))
        try:
            for field, text in zip(FIELDS, row[1:]):
                columns[field].append(_parse_ledger_cell(field, text))
        except (KeyError, ValueError) as exc:
            raise OutOfRange("malformed ledger row %d: %s" % (number, exc))
    arrays = {field: np.array(values, dtype=np.int8)
              for field, values in columns.items()}
    return TrialLedger(n=len(arrays['prepared']), seed=seed, **arrays)


def key_sidecar(bundle):
    return {name: {'rate': bundle.rates[name],
                   'balance': bundle.balance[name],
                   'n_conclusive': bundle.n_conclusive[name]}
            for name in ('ab', 'ac', 'abc')}


def write_keys(directory, bundle):

    """
    Write ``keys.txt`` (the ab, ac and abc keys, one per line) and the
    ``keys.json`` sidecar into `directory`.

    :returns: the two paths written.
    """

    os.makedirs(directory, exist_ok=True)
    text_path = os.path.join(directory, 'keys.txt')
    json_path = os.path.join(directory, 'keys.json')
    keys = bundle.keys()
    with open(text_path, 'w', encoding='ascii', newline='\n') as stream:
        for name in ('ab', 'ac', 'abc'):
            stream.write(keys[name] + '\n')
    with open(json_path, 'w', encoding='utf-8', newline='\n') as stream:
        write_json(stream, key_sidecar(bundle))
    logger.info("Wrote keys to {0}", directory)
    return text_path, json_path
