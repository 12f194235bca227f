"""
Common exceptions throughout seqdisc.

Every error carries an ``exit_code`` which the command-line front-end returns
to the shell: 2 for unusable parameters, 3 for numerical trouble at runtime.
"""


class SeqDiscError(Exception):
    """A generic error somewhere in seqdisc."""

    exit_code = 3


class OutOfRange(SeqDiscError, ValueError):
    """A parameter lies outside its domain (e.g. an overlap of 1)."""

    exit_code = 2


class ConstraintViolation(SeqDiscError, ValueError):
    """The requested measurement cannot be realized by a unitary."""

    exit_code = 2


class UnsupportedPriors(SeqDiscError, ValueError):
    """The quantity is only defined here for equal priors."""

    exit_code = 2


class UnknownFigure(SeqDiscError, KeyError):
    """The requested dataset was not registered."""

    exit_code = 2

    def __str__(self):
        return Exception.__str__(self)


class NumericalDegeneracy(SeqDiscError, ArithmeticError):
    """An outcome with (numerically) zero probability was selected."""

    exit_code = 3
