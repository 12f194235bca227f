import logbook

from seqdisc.exceptions import UnknownFigure


logger = logbook.Logger('seqdisc.registry')


class Registry(dict):

    """
    Figure and sweep builders, keyed by id.

    A builder returns a ``(columns, rows)`` table. :mod:`seqdisc.figures`
    keeps one registry for figures (called with a resolution) and one for
    sweeps (called with a :class:`~seqdisc.config.RunConfig`); calling a
    registry with an id runs the matching builder.
    """

    def builder(self, func=None, name=None):
        """Register `func` under `name` (its ``__name__`` by default); usable as a decorator."""
        if func is None:
            return lambda func: self.builder(func, name=name)
        key = name or func.__name__
        if key in self:
            logger.warning("Replacing builder {0}", key)
        self[key] = func
        return func

    def names(self):
        return sorted(self)

    def __call__(self, name, *args, **kwargs):
        if name not in self:
            raise UnknownFigure("unknown dataset %r (known: %s)" % (
                name, ', '.join(self.names())))
        return self[name](*args, **kwargs)
