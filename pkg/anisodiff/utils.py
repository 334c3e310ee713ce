import sys
import logging
from logging import StreamHandler, Formatter
from functools import wraps
from collections import OrderedDict

import numpy as np

from anisodiff import log
from anisodiff.exceptions import DimensionMismatchError


def log_to_stream(stream=sys.stderr, level=logging.NOTSET,
                  fmt=logging.BASIC_FORMAT):
    """ Add :class:`logging.StreamHandler` to logger which logs to a stream.

    :param stream. Stream to log to, default STDERR.
    :param level: Log level, default NOTSET.
    :param fmt: String with log format, default is BASIC_FORMAT.
    """
    fmt = Formatter(fmt)
    handler = StreamHandler(stream)
    handler.setFormatter(fmt)
    handler.setLevel(level)

    log.addHandler(handler)
    if level != logging.NOTSET:
        log.setLevel(level)


def memoize(f=None, maxsize=None):
    """ Decorator which caches function's return value each it is called.
    If called later with same arguments, the cached value is returned.

    All positional and keyword arguments must be hashable. The cache is
    available as ``f.cache`` so callers can clear it.

    :param maxsize: Number of values kept, or a callable returning it. When
        full the least recently used value is dropped. Default is unbounded.
    """
    if f is None:
        return lambda f: memoize(f, maxsize)

    cache = OrderedDict()

    @wraps(f)
    def inner(*args, **kwargs):
        key = (args, tuple(sorted(kwargs.items())))
        if key in cache:
            cache.move_to_end(key)
            return cache[key]

        cache[key] = f(*args, **kwargs)

        limit = maxsize() if callable(maxsize) else maxsize
        while limit is not None and len(cache) > limit:
            cache.popitem(last=False)

        return cache[key]

    inner.cache = cache
    return inner


def check_length(u, size, name='u'):
    """ Return `u` as flat float array and check its length.

    :param u: Array like.
    :param size: Expected number of entries.
    :param name: Name used in the error message.
    :return: 1D numpy array.
    :raises DimensionMismatchError: When length differs from `size`.
    """
    u = np.asarray(u, dtype=float).ravel()
    if u.size != size:
        raise DimensionMismatchError(
            '{0} has {1} entries, expected {2}.'.format(name, u.size, size))

    return u


def dense_dump(matrix, path):
    """ Write matrix to `path` as row-major text, one row per line.

    :param matrix: Dense or sparse matrix.
    :param path: Path of output file.
    """
    if hasattr(matrix, 'toarray'):
        matrix = matrix.toarray()

    np.savetxt(path, np.atleast_2d(matrix), fmt='%.16e', delimiter='\t')
    log.debug('Wrote {0}x{1} matrix to {2}.'.format(matrix.shape[0],
                                                    matrix.shape[1], path))
