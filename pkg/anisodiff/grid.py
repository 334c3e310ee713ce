"""
Grids
-----

Uniform closed grids. A 1D grid on ``[x_L, x_R]`` with ``n`` points has
points ``x_j = x_L + (j - 1) dx`` for ``j = 1..n`` and ``dx = (x_R - x_L) /
(n - 1)``. Both endpoints are grid points, also in a periodic direction.

A 2D grid is the tensor product of an x-grid and a y-grid. Grid functions are
flattened with the x index as slow index::

    k = (i - 1) * n_y + (j - 1)

so a grid vector reshapes (C order) into an ``(n_x, n_y)`` array and the
Kronecker product ``A (x) B`` acts with ``A`` over x-blocks and ``B`` within
each block.

"""
import numpy as np

from anisodiff.exceptions import GridError
from anisodiff.utils import check_length


class Grid1D(object):
    """ Uniform closed 1D grid. """

    def __init__(self, x_left, x_right, n):
        self.x_left = float(x_left)
        self.x_right = float(x_right)
        self.n = int(n)

    @property
    def dx(self):
        return (self.x_right - self.x_left) / (self.n - 1)

    @property
    def length(self):
        return self.x_right - self.x_left

    @property
    def points(self):
        points = self.x_left + np.arange(self.n) * self.dx
        points[-1] = self.x_right

        return points

    def __eq__(self, other):
        return isinstance(other, Grid1D) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def _key(self):
        return (self.x_left, self.x_right, self.n)

    def __repr__(self):
        return 'Grid1D({0!r}, {1!r}, {2})'.format(self.x_left, self.x_right,
                                                  self.n)


class Grid2D(object):
    """ Tensor product of two :class:`Grid1D`. """

    def __init__(self, gx, gy):
        self.gx = gx
        self.gy = gy

    @property
    def shape(self):
        return (self.gx.n, self.gy.n)

    @property
    def size(self):
        return self.gx.n * self.gy.n

    @property
    def lengths(self):
        return (self.gx.length, self.gy.length)

    @property
    def x(self):
        return self.gx.points

    @property
    def y(self):
        return self.gy.points

    def mesh(self):
        """ Return coordinate arrays ``(X, Y)`` of shape ``(n_x, n_y)``. """
        return np.meshgrid(self.x, self.y, indexing='ij')

    def sample(self, f):
        """ Evaluate ``f(X, Y)`` on all grid points.

        :param f: Vectorized function of two coordinate arrays.
        :return: Flat grid vector.
        """
        X, Y = self.mesh()
        return np.broadcast_to(np.asarray(f(X, Y), dtype=float),
                               self.shape).ravel().copy()

    def as_array(self, u):
        """ View flat grid vector as ``(n_x, n_y)`` array. """
        return check_length(u, self.size).reshape(self.shape)

    def __eq__(self, other):
        return isinstance(other, Grid2D) and \
            (self.gx, self.gy) == (other.gx, other.gy)

    def __hash__(self):
        return hash((self.gx, self.gy))

    def __repr__(self):
        return 'Grid2D({0!r}, {1!r})'.format(self.gx, self.gy)


class NormWeights(object):
    """ Diagonal quadrature weights ``dx * h_j`` of an SBP norm. """

    def __init__(self, h, dx):
        self.h = np.asarray(h, dtype=float)
        self.dx = float(dx)

        if np.any(self.h <= 0):
            raise GridError('Norm weights must be positive.')

    @property
    def diagonal(self):
        """ Diagonal of ``H = dx * diag(h)``. """
        return self.dx * self.h


def make_grid_1d(x_left, x_right, n):
    """ Return uniform closed grid on ``[x_left, x_right]`` with `n` points.

    :param x_left: Left end point.
    :param x_right: Right end point.
    :param n: Number of points, at least 2.
    :return: :class:`Grid1D`.
    :raises GridError: When ``n < 2`` or interval is degenerate.
    """
    if int(n) != n or n < 2:
        raise GridError('Need at least 2 points, got {0}.'.format(n))

    if not np.isfinite(x_left) or not np.isfinite(x_right) or \
            not x_left < x_right:
        raise GridError('Interval [{0}, {1}] is degenerate.'.format(x_left,
                                                                    x_right))

    return Grid1D(x_left, x_right, n)


def make_grid_2d(x_left, x_right, n_x, y_left, y_right, n_y):
    """ Return tensor product grid of two uniform grids. """
    return Grid2D(make_grid_1d(x_left, x_right, n_x),
                  make_grid_1d(y_left, y_right, n_y))


def flat_index(grid, i, j):
    """ Return position of grid point ``(i, j)`` in a flat grid vector.

    :param grid: :class:`Grid2D`.
    :param i: 1-based x index.
    :param j: 1-based y index.
    :return: 0-based index into grid vector.
    :raises GridError: When index is out of range.
    """
    n_x, n_y = grid.shape
    if not (1 <= i <= n_x and 1 <= j <= n_y):
        raise GridError('Index ({0}, {1}) outside {2}x{3} grid.'
                        .format(i, j, n_x, n_y))

    return (i - 1) * n_y + (j - 1)


def unflatten(grid, k):
    """ Inverse of :func:`flat_index`.

    :return: Tuple with 1-based ``(i, j)``.
    """
    if not 0 <= k < grid.size:
        raise GridError('Index {0} outside grid of size {1}.'
                        .format(k, grid.size))

    i, j = divmod(k, grid.gy.n)
    return i + 1, j + 1


def h_norm(u, grid, weights_x, weights_y):
    """ Return ``sqrt(u^T (H_x (x) H_y) u)``.

    :param u: Flat grid vector.
    :param grid: :class:`Grid2D`.
    :param weights_x: :class:`NormWeights` of x-direction.
    :param weights_y: :class:`NormWeights` of y-direction.
    :return: Non-negative float.
    """
    U = grid.as_array(u)
    hx, hy = weights_x.diagonal, weights_y.diagonal
    if hx.size != grid.gx.n or hy.size != grid.gy.n:
        raise GridError('Norm weights do not match grid.')

    return float(np.sqrt(np.einsum('i,ij,j->', hx, U ** 2, hy)))


def l2_norm(u, grid):
    """ Return ``sqrt(dx dy sum(u ** 2))``. """
    u = check_length(u, grid.size)
    return float(np.sqrt(grid.gx.dx * grid.gy.dx * np.dot(u, u)))


def norm_equivalence_constants(weights_x, weights_y):
    """ Return bounds ``(lower, upper)`` with

        lower <= ||u||_l2 ** 2 / ||u||_H ** 2 <= upper

    for every nonzero grid vector.
    """
    products = np.outer(weights_x.h, weights_y.h)
    return 1 / products.max(), 1 / products.min()
