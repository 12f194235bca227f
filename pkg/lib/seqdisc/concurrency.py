"""Utilities for spreading independent work over threads in a sane way."""

from contextlib import contextmanager
import os
import threading

import logbook


logger = logbook.Logger('seqdisc.concurrency')

THREADS_VARIABLE = 'SEQDISC_THREADS'


class Callback(object):

    """
    The result slot of one worker thread.

    The worker hands back a value with :meth:`send` or an exception with
    :meth:`throw`; the thread that started it blocks in :meth:`wait`, which
    returns the value or re-raises the exception there.
    """

    def __init__(self):
        self.done = threading.Event()
        self.value = None
        self.error = None

    def start(self, func, *args):
        """Run ``func(*args)`` on a daemon thread, forwarding any error here."""
        def target():
            with self.forwarding():
                func(*args)
        thread = threading.Thread(target=target, daemon=True)
        thread.start()
        return thread

    def send(self, value):
        self.value = value
        self.done.set()

    def throw(self, error):
        self.error = error
        self.done.set()

    @contextmanager
    def forwarding(self):
        # Swallows the error in the worker; wait() raises it.
        try:
            yield
        except Exception as exc:
            logger.debug("Worker {0} failed: {1!r}",
                         threading.current_thread().name, exc)
            self.throw(exc)

    def wait(self, timeout=None):
        if not self.done.wait(timeout):
            raise RuntimeError("worker did not finish within %r s" % (timeout,))
        if self.error is not None:
            raise self.error
        return self.value


def worker_count(jobs=None):

    """
    How many worker threads to use for `jobs` independent pieces of work.

    Defaults to the CPU count, capped by the ``SEQDISC_THREADS`` environment
    variable and by `jobs`. Always at least 1.
    """

    count = os.cpu_count() or 1
    cap = os.environ.get(THREADS_VARIABLE, '').strip()
    if cap:
        try:
            count = min(count, int(cap))
        except ValueError:
            logger.warning("Ignoring non-integer {0}={1!r}",
                           THREADS_VARIABLE, cap)
    if jobs is not None:
        count = min(count, jobs)
    return max(1, count)


def run_partitioned(func, items, workers=None):

    """
    Apply `func` to every item, spreading contiguous slices over threads.

    Results come back in item order whatever the number of workers, so any
    reduction over them is deterministic. The first exception raised by a
    worker is re-raised here.

    :param func: a callable taking one item.
    :param items: a sequence of independent work items.
    :param workers: number of threads; :func:`worker_count` by default.
    """

    items = list(items)
    if not items:
        return []
    if workers is None:
        workers = worker_count(len(items))
    workers = max(1, min(workers, len(items)))
    if workers == 1:
        return [func(item) for item in items]

    bounds = [len(items) * k // workers for k in range(workers + 1)]
    callbacks, threads = [], []
    for start, stop in zip(bounds[:-1], bounds[1:]):
        callback = Callback()

        def work(callback=callback, chunk=items[start:stop]):
            callback.send([func(item) for item in chunk])

        callbacks.append(callback)
        threads.append(callback.start(work))
    logger.debug("Spread {0} items over {1} threads", len(items), workers)

    results = []
    try:
        for callback in callbacks:
            results.extend(callback.wait())
    finally:
        for thread in threads:
            thread.join()
    return results
