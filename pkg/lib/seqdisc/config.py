"""
Run configuration.

Options come from three places, in decreasing precedence: command-line
flags, a config file, and the defaults below. The config file is flat text:

    # equal priors, just past the critical overlap
    s = 0.2
    eta1 = 0.5
    scheme = success-only

Keys are the long flag names (``-`` and ``_`` are interchangeable), blank
lines and ``#`` comments are ignored.
"""

from dataclasses import dataclass, replace
import math

import logbook

from seqdisc.exceptions import OutOfRange


logger = logbook.Logger('seqdisc.config')

COMMANDS = ('optimize', 'sweep', 'simulate', 'qkd', 'figure')
SCHEMES = ('min-failure', 'success-only', 'flip-flop')
AXES = ('s', 'eta1', 'q1b', 'c')
FORMATS = ('csv', 'json')

DEFAULT_RESOLUTION = 401


def _flag(text):
    text = str(text).strip().lower()
    if text in ('1', 'true', 'yes', 'on'):
        return True
    if text in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError("not a boolean: %r" % (text,))


def _choice(options):
    def convert(text):
        text = str(text).strip()
        if text not in options:
            raise ValueError("%r is not one of %s" % (text, ', '.join(options)))
        return text
    return convert


def _optional(convert):
    def optional(text):
        if text is None or str(text).strip() in ('', 'none'):
            return None
        return convert(text)
    return optional


@dataclass(frozen=True)
class RunConfig(object):

    """
    Everything one invocation needs. Build with :meth:`resolve`.

    ``t``, ``q1b`` and ``q1c``, when all given, replace the scheme's optimal
    strategy with an explicit one. ``resolution`` of ``None`` means the
    command's own default.
    """

    command: str = 'optimize'
    s: float = 0.25
    eta1: float = 0.5
    scheme: str = 'min-failure'
    c: float = None
    t: float = None
    q1b: float = None
    q1c: float = None
    single: bool = False
    axis: str = 's'
    start: float = None
    stop: float = None
    resolution: int = None
    trials: int = 100000
    seed: int = 0
    figure: str = None
    output: str = None
    format: str = None
    spool_dir: str = None
    dump_unitaries: bool = False
    verbose: bool = False

    @property
    def explicit_strategy(self):
        return None not in (self.t, self.q1b, self.q1c)

    @property
    def output_format(self):
        if self.format:
            return self.format
        return 'csv' if self.command in ('sweep', 'figure') else 'json'

    @classmethod
    def resolve(cls, command, flags=None, config_path=None):

        """
        Merge `flags` (a mapping; ``None`` values count as unset) over the
        contents of `config_path` over the defaults.

        :raises OutOfRange: for unknown keys, unparsable or invalid values.
        """

        values = {}
        if config_path:
            values.update(read_config_file(config_path))
        for key, value in (flags or {}).items():
            if value is not None:
                values[key.replace('-', '_')] = value
        values['command'] = command
        config = cls()
        converted = {}
        for key, value in values.items():
            if key not in CONVERTERS:
                raise OutOfRange("unknown option %r" % (key,))
            try:
                converted[key] = CONVERTERS[key](value)
            except (TypeError, ValueError) as exc:
                raise OutOfRange("bad value for %s: %s" % (key, exc))
        config = replace(config, **converted)
        config.validate()
        logger.debug("Resolved configuration {0!r}", config)
        return config

    def validate(self):
        if not (0.0 <= self.s < 1.0):
            raise OutOfRange("overlap s = %r outside [0, 1)" % (self.s,))
        if not (0.0 < self.eta1 < 1.0):
            raise OutOfRange("prior eta1 = %r outside (0, 1)" % (self.eta1,))
        if self.c is not None and not (0.0 <= self.c <= 1.0):
            raise OutOfRange("flipping rate c = %r outside [0, 1]" % (self.c,))
        if self.resolution is not None and self.resolution < 2:
            raise OutOfRange("resolution must be at least 2")
        if self.trials < 1:
            raise OutOfRange("trials must be at least 1")
        if not (0 <= self.seed < 2 ** 64):
            raise OutOfRange("seed %r outside [0, 2^64)" % (self.seed,))
        for name in ('start', 'stop'):
            value = getattr(self, name)
            if value is not None and not math.isfinite(value):
                raise OutOfRange("%s must be finite" % (name,))
        if (self.start is not None and self.stop is not None and
                not self.start < self.stop):
            raise OutOfRange("empty range [%r, %r]" % (self.start, self.stop))
        return self


CONVERTERS = {
    'command': _choice(COMMANDS),
    's': float,
    'eta1': float,
    'scheme': _choice(SCHEMES),
    'c': _optional(float),
    't': _optional(float),
    'q1b': _optional(float),
    'q1c': _optional(float),
    'single': _flag,
    'axis': _choice(AXES),
    'start': _optional(float),
    'stop': _optional(float),
    'resolution': _optional(int),
    'trials': int,
    'seed': int,
    'figure': _optional(str),
    'output': _optional(str),
    'format': _optional(_choice(FORMATS)),
    'spool_dir': _optional(str),
    'dump_unitaries': _flag,
    'verbose': _flag,
}


def read_config_file(path):

    """
    Parse a flat ``key = value`` config file into a dict of strings.

    :raises OutOfRange: for lines without ``=``.
    :raises OSError: if the file cannot be read.
    """

    values = {}
    with open(path, encoding='utf-8') as stream:
        for number, line in enumerate(stream, start=1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise OutOfRange("%s:%d: expected 'key = value'" % (
                    path, number))
            key, value = (part.strip() for part in line.split('=', 1))
            values[key.replace('-', '_')] = value
    logger.debug("Read {0} options from {1}", len(values), path)
    return values
