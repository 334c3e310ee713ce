"""
Output files
------------

All files are tab separated text. Floats are written with ``'{0:.16e}'``,
which does not depend on the locale. A file starts with header lines ``# key
= value``, followed by a line with column names and the rows.

=========== ===================================== ===========================
File        Columns                               Notes
=========== ===================================== ===========================
table       ``n, error``                          one block per kappa_perp,
                                                  each preceded by ``# block
                                                  kappa_perp`` and ``# slope``
field       ``x, y, u``                           rows in flat grid order
contours    ``level, segment, x, y``              one row per polyline vertex
profile     ``psi, T``                            at theta = 0
poincare    ``seed, transit, psi, theta``
map         ``node, direction, c1..c4, w1..w4``
=========== ===================================== ===========================

"""
import os

import numpy as np

from anisodiff import log
from anisodiff.harness import ConvergenceTable
from anisodiff.exceptions import ConfigError

FLOAT = '{0:.16e}'


def _format(value):
    if isinstance(value, (float, np.floating)):
        return FLOAT.format(value)
    if isinstance(value, (tuple, list)):
        return ' '.join(_format(v) for v in value)
    return str(value)


def _header(header):
    return ''.join('# {0} = {1}\n'.format(key, _format(value))
                   for key, value in (header or []))


def _write(path, lines):
    try:
        with open(path, 'w') as f:
            f.writelines(lines)
    except (IOError, OSError) as e:
        raise ConfigError('Cannot write {0}: {1}'.format(path, e))

    log.info('Wrote {0}.'.format(path))


def output_path(directory, name):
    """ Return path of `name` in `directory`, creating the directory. """
    if not os.path.isdir(directory):
        os.makedirs(directory)

    return os.path.join(directory, name)


def write_table(tables, path, header=None):
    """ Write convergence tables.

    :param tables: :class:`ConvergenceTable` or list of them.
    :param path: Output path.
    :param header: Sequence of ``(key, value)`` pairs.
    """
    if isinstance(tables, ConvergenceTable):
        tables = [tables]

    lines = [_header(header)]
    for table in tables:
        lines.append('# block kappa_perp = {0}\n'.format(
            FLOAT.format(table.kappa_perp)))
        if len(table.rows) > 1:
            lines.append('# slope = {0}\n'.format(FLOAT.format(table.slope)))
        lines.append('n\terror\n')
        lines.extend('{0}\t{1}\n'.format(n, FLOAT.format(error))
                     for n, error in table.rows)

    _write(path, lines)


def read_table(path):
    """ Read file written by :func:`write_table`.

    :return: Tuple with header dict and list of :class:`ConvergenceTable`.
    """
    header, tables = {}, []
    kappa_perp = None
    with open(path) as f:
        for line in f:
            line = line.rstrip('\n')
            if not line:
                continue

            if line.startswith('#'):
                key, _, value = line[1:].partition('=')
                key, value = key.strip(), value.strip()
                if key == 'block kappa_perp':
                    kappa_perp = float(value)
                elif key != 'slope':
                    header[key] = value
            elif line == 'n\terror':
                tables.append(ConvergenceTable(kappa_perp))
            else:
                n, error = line.split('\t')
                tables[-1].add(int(n), float(error))

    return header, tables


def write_field(u, grid, path, header=None):
    """ Write grid function as rows ``x, y, u`` in flat grid order. """
    X, Y = grid.mesh()
    U = grid.as_array(u)

    lines = [_header(header), 'x\ty\tu\n']
    lines.extend('{0}\t{1}\t{2}\n'.format(FLOAT.format(px), FLOAT.format(py),
                                          FLOAT.format(pu))
                 for px, py, pu in zip(X.ravel(), Y.ravel(), U.ravel()))
    _write(path, lines)


def write_contours(contours, path, header=None):
    """ Write contour polylines.

    :param contours: List of ``(level, polylines)`` where every polyline is
        an array of shape ``(m, 2)`` with physical coordinates.
    """
    lines = [_header(header), 'level\tsegment\tx\ty\n']
    for level, polylines in contours:
        for segment, polyline in enumerate(polylines):
            lines.extend('{0}\t{1}\t{2}\t{3}\n'.format(
                FLOAT.format(level), segment, FLOAT.format(px),
                FLOAT.format(py)) for px, py in polyline)

    _write(path, lines)


def write_poincare(sections, path, header=None):
    """ Write Poincare section, one array of shape ``(transits, 2)`` per
    seed.
    """
    lines = [_header(header), 'seed\ttransit\tpsi\ttheta\n']
    for seed, points in enumerate(sections):
        lines.extend('{0}\t{1}\t{2}\t{3}\n'.format(
            seed, transit + 1, FLOAT.format(p[0]), FLOAT.format(p[1]))
            for transit, p in enumerate(points))

    _write(path, lines)


def write_map(parallel_map, path, header=None):
    """ Write stencil records of a parallel map as text. """
    lines = [_header(header),
             'node\tdirection\tc1\tc2\tc3\tc4\tw1\tw2\tw3\tw4\n']
    for direction, (corners, weights) in [('forward', parallel_map.forward),
                                          ('backward',
                                           parallel_map.backward)]:
        for node, (c, w) in enumerate(zip(corners, weights)):
            lines.append('{0}\t{1}\t{2}\t{3}\n'.format(
                node, direction, '\t'.join(str(int(v)) for v in c),
                '\t'.join(FLOAT.format(v) for v in w)))

    _write(path, lines)


def write_profile(psi, values, path, header=None):
    """ Write radial profile as rows ``psi, T``. """
    lines = [_header(header), 'psi\tT\n']
    lines.extend('{0}\t{1}\n'.format(FLOAT.format(p), FLOAT.format(v))
                 for p, v in zip(psi, values))
    _write(path, lines)
