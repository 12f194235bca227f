"""
Sequential unambiguous discrimination of two pure qubit states.

Bob and then Charlie each try to identify, without error, which of two
non-orthogonal states Alice prepared. The package finds their optimal
measurements, builds them as explicit unitaries, simulates them and sifts
the keys they share.
"""

from seqdisc.exceptions import (ConstraintViolation, NumericalDegeneracy,
                                OutOfRange, SeqDiscError, UnknownFigure,
                                UnsupportedPriors)
from seqdisc.model import (DiscriminationProblem, OptimizationResult,
                           SequentialStrategy, embed_states, make_problem,
                           make_strategy)
