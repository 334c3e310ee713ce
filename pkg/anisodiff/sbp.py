"""
Summation-by-parts operators
----------------------------

Diagonal norm summation-by-parts (SBP) operators of order 2 and 4 on a
uniform closed grid.

First derivative ``D1 = H^-1 Q`` with

    Q + Q^T = B = diag(-1, 0, ..., 0, 1),

and variable coefficient second derivative

    D2 = H^-1 (-M + B K S),

with ``K = diag(kappa)``, ``M`` symmetric positive semi-definite and ``S``
the boundary derivative: the first and last row of ``D1``, zero elsewhere.
All operators are fully compatible:

    M = D1^T K H D1 + R,  R symmetric positive semi-definite.

With ``S`` taken from ``D1`` the boundary rows of the order 2 operator
vanish, so ``D2 x**2 = 2`` holds on the interior rows only. The order 4
operators differentiate quadratics exactly on every row.

================ ======================= ========================
Order            Norm weights h          M
================ ======================= ========================
2                1/2, 1, ..., 1, 1/2     narrow, cell averaged k
4, constant k    17/48, 59/48, 43/48,    narrow
                 49/48, 1, ...
4, variable k    as above                D1^T K H D1 + R
================ ======================= ========================

The order 4 closure needs 8 points, two boundary blocks of 4 rows.

Operators are :mod:`scipy.sparse` CSR matrices. 2D operators are never
assembled; :class:`SbpOperators2D` applies Kronecker products through
reshapes.

"""
import numpy as np
from scipy import sparse
from scipy.linalg import pinvh, eigh, eigvalsh

from anisodiff import log
from anisodiff.grid import NormWeights
from anisodiff import utils
from anisodiff.utils import check_length
from anisodiff.exceptions import (OperatorSizeError, DiffusivityError,
                                  DimensionMismatchError)

MIN_POINTS = {2: 4, 4: 8}

_H4 = np.array([17, 59, 43, 49]) / 48.

_Q4 = np.array([
    [-1 / 2., 59 / 96., -1 / 12., -1 / 32., 0., 0.],
    [-59 / 96., 0., 59 / 96., 0., 0., 0.],
    [1 / 12., -59 / 96., 0., 59 / 96., -1 / 12., 0.],
    [1 / 32., 0., -59 / 96., 0., 2 / 3., -1 / 12.],
])
_Q4_INTERIOR = np.array([1 / 12., -2 / 3., 0., 2 / 3., -1 / 12.])

_M4 = np.array([
    [9 / 8., -59 / 48., 1 / 12., 1 / 48., 0., 0.],
    [-59 / 48., 59 / 24., -59 / 48., 0., 0., 0.],
    [1 / 12., -59 / 48., 55 / 24., -59 / 48., 1 / 12., 0.],
    [1 / 48., 0., -59 / 48., 59 / 24., -4 / 3., 1 / 12.],
])
_M4_INTERIOR = np.array([1 / 12., -4 / 3., 5 / 2., -4 / 3., 1 / 12.])


def _banded(n, block, interior, antisymmetric):
    """ Return n x n matrix with `block` in upper left corner, its mirror
    image in the lower right corner and `interior` centered on the remaining
    rows.
    """
    A = sparse.lil_matrix((n, n))
    rows, cols = block.shape
    half = len(interior) // 2
    sign = -1. if antisymmetric else 1.

    for i in range(rows, n - rows):
        for k, c in enumerate(interior):
            if c != 0:
                A[i, i - half + k] = c

    for i in range(rows):
        for j in range(cols):
            if block[i, j] != 0:
                A[i, j] = block[i, j]
                A[n - 1 - i, n - 1 - j] = sign * block[i, j]

    return A.tocsr()


def _difference(n, order):
    """ Return undivided difference matrix of given order, shape
    ``(n - order, n)``.
    """
    stencil = np.diff(np.eye(order + 1), n=order, axis=0)[0]
    return sparse.diags(list(stencil), list(range(order + 1)),
                        shape=(n - order, n), format='csr')


def _boundary_rows(D1):
    """ Return matrix holding the first and last row of `D1`, zero
    elsewhere.
    """
    n = D1.shape[0]
    selector = sparse.csr_matrix(([1., 1.], ([0, n - 1], [0, n - 1])),
                                 shape=(n, n))
    return (selector @ D1).tocsr()


class SbpOperatorSet(object):
    """ 1D SBP operators for one grid direction.

    :ivar order: Accuracy order, 2 or 4.
    :ivar n: Number of grid points.
    :ivar dx: Grid spacing.
    :ivar kappa: Diffusivity per grid point.
    :ivar H: :class:`anisodiff.grid.NormWeights`.
    :ivar D1: First derivative.
    :ivar D2: Second derivative ``d/dx (kappa d/dx)``.
    :ivar M: Symmetric positive semi-definite part of ``-H D2``.
    :ivar S: Boundary derivative, nonzero in first and last row only.
    """

    def __init__(self, order, n, dx, kappa, h, D1, M, S):
        self.order = order
        self.n = n
        self.dx = dx
        self.kappa = kappa
        self.H = NormWeights(h, dx)
        self.D1 = D1
        self.M = M
        self.S = S

        self.D2 = sparse.diags(1 / self.H.diagonal) @ \
            (-M + self.B @ sparse.diags(kappa) @ S)
        self.D2 = self.D2.tocsr()
        self._borrowing = None

    @property
    def B(self):
        return sparse.diags(np.r_[-1., np.zeros(self.n - 2), 1.]).tocsr()

    @property
    def Q(self):
        return (sparse.diags(self.H.diagonal) @ self.D1).tocsr()

    @property
    def boundary_derivative(self):
        return self.S

    @property
    def R(self):
        """ Remainder ``M - D1^T K H D1``. """
        KH = sparse.diags(self.kappa * self.H.diagonal)
        return (self.M - self.D1.T @ KH @ self.D1).tocsr()

    @property
    def borrowing(self):
        """ Largest ``beta`` such that for all ``u``

            u^T M u >= beta dx (kappa_1 (S u)_1 ** 2 + kappa_n (S u)_n ** 2).

        With ``S`` the boundary rows of ``D1`` and ``R`` semi-definite it is
        at least ``h_1`` for constant diffusivity.
        """
        if self._borrowing is None:
            S = self.S.toarray()
            C = np.column_stack([np.sqrt(self.kappa[0]) * S[0],
                                 np.sqrt(self.kappa[-1]) * S[-1]])
            G = C.T @ pinvh(self.M.toarray()) @ C
            self._borrowing = 1 / (self.dx * eigvalsh(G).max())
            log.debug('Borrowing coefficient of order {0} operator with {1} '
                      'points is {2:.10f}.'.format(self.order, self.n,
                                                   self._borrowing))

        return self._borrowing


def build_sbp(order, n, dx, kappa=1.):
    """ Build 1D SBP operators.

    :param order: Accuracy order, 2 or 4.
    :param n: Number of grid points.
    :param dx: Grid spacing.
    :param kappa: Scalar or per-point diffusivity, strictly positive.
    :return: :class:`SbpOperatorSet`.
    :raises OperatorSizeError: When order is unsupported or `n` is too small
        for its boundary closure.
    :raises DiffusivityError: When kappa is not strictly positive.
    """
    if order not in MIN_POINTS:
        raise OperatorSizeError('Order {0} is not supported.'.format(order))

    if n < MIN_POINTS[order]:
        raise OperatorSizeError('Order {0} needs at least {1} points, got '
                                '{2}.'.format(order, MIN_POINTS[order], n))

    kappa = np.broadcast_to(np.asarray(kappa, dtype=float), (n,)).copy()
    if not np.all(np.isfinite(kappa)) or np.any(kappa <= 0):
        raise DiffusivityError('Diffusivity must be strictly positive.')

    if order == 2:
        h = np.ones(n)
        h[[0, -1]] = 0.5
        Q = _banded(n, np.array([[-0.5, 0.5]]), np.array([-0.5, 0., 0.5]),
                    antisymmetric=True)
        D1 = (sparse.diags(1 / (dx * h)) @ Q).tocsr()

        delta = _difference(n, 1)
        cell_kappa = 0.5 * (kappa[:-1] + kappa[1:])
        M = (delta.T @ sparse.diags(cell_kappa) @ delta / dx).tocsr()
        return SbpOperatorSet(order, n, dx, kappa, h, D1, M,
                              _boundary_rows(D1))

    h = np.ones(n)
    h[:4] = _H4
    h[-4:] = _H4[::-1]
    Q = _banded(n, _Q4, _Q4_INTERIOR, antisymmetric=True)
    D1 = (sparse.diags(1 / (dx * h)) @ Q).tocsr()

    if np.ptp(kappa) == 0:
        M = kappa[0] * _banded(n, _M4, _M4_INTERIOR, antisymmetric=False) / dx
    else:
        delta3, delta4 = _difference(n, 3), _difference(n, 4)
        kappa3 = np.convolve(kappa, np.ones(4) / 4, mode='valid')
        kappa4 = np.convolve(kappa, np.ones(5) / 5, mode='valid')
        M = D1.T @ sparse.diags(kappa * dx * h) @ D1 + \
            delta3.T @ sparse.diags(kappa3) @ delta3 / (18 * dx) + \
            delta4.T @ sparse.diags(kappa4) @ delta4 / (144 * dx)

    return SbpOperatorSet(order, n, dx, kappa, h, D1, M.tocsr(),
                          _boundary_rows(D1))


class SbpReport(object):
    """ Outcome of :func:`verify_sbp_identities`. """

    def __init__(self, q_defect, m_symmetry, m_min_eig, r_symmetry,
                 r_min_eig, d2_defect, tol, eig_tol):
        self.q_defect = q_defect
        self.d2_defect = d2_defect
        self.m_symmetry = m_symmetry
        self.m_min_eig = m_min_eig
        self.r_symmetry = r_symmetry
        self.r_min_eig = r_min_eig
        self.passed = q_defect <= tol and m_symmetry <= tol and \
            r_symmetry <= tol and d2_defect <= tol and \
            m_min_eig >= -eig_tol and r_min_eig >= -eig_tol

    def __repr__(self):
        return ('SbpReport(q_defect={0:.2e}, m_symmetry={1:.2e}, '
                'm_min_eig={2:.2e}, r_symmetry={3:.2e}, r_min_eig={4:.2e}, '
                'd2_defect={5:.2e}, passed={6})').format(
                    self.q_defect, self.m_symmetry, self.m_min_eig,
                    self.r_symmetry, self.r_min_eig, self.d2_defect,
                    self.passed)


def verify_sbp_identities(ops, tol=1e-12, eig_tol=None):
    """ Check SBP structure of `ops` with dense linear algebra.

    Checks ``Q + Q^T = B``, symmetry and semi-definiteness of ``M`` and of the
    compatibility remainder ``R = M - D1^T K H D1``, and the decomposition
    ``H D2 = -M + B K D1``.

    :param ops: :class:`SbpOperatorSet`.
    :param tol: Tolerance for entrywise defects.
    :param eig_tol: Tolerance for negative eigenvalues, default `tol`.
    :return: :class:`SbpReport`.
    """
    eig_tol = tol if eig_tol is None else eig_tol
    Q, B = ops.Q.toarray(), ops.B.toarray()
    M, R = ops.M.toarray(), ops.R.toarray()
    HD2 = ops.H.diagonal[:, None] * ops.D2.toarray()
    BKD1 = B @ np.diag(ops.kappa) @ ops.D1.toarray()

    report = SbpReport(
        q_defect=np.abs(Q + Q.T - B).max(),
        m_symmetry=np.abs(M - M.T).max(),
        m_min_eig=eigh(0.5 * (M + M.T), eigvals_only=True).min(),
        r_symmetry=np.abs(R - R.T).max(),
        r_min_eig=eigh(0.5 * (R + R.T), eigvals_only=True).min(),
        d2_defect=np.abs(HD2 + M - BKD1).max(),
        tol=tol, eig_tol=eig_tol)

    log.debug('SBP identities of order {0} operator with {1} points: {2!r}'
              .format(ops.order, ops.n, report))
    return report


class SbpOperators2D(object):
    """ Kronecker extension of two 1D operator sets to a 2D grid.

    Every action takes and returns flat grid vectors.
    """

    def __init__(self, ops_x, ops_y, grid):
        self.ops_x = ops_x
        self.ops_y = ops_y
        self.grid = grid

    def _as_array(self, u):
        return self.grid.as_array(u)

    def along_x(self, A, u):
        """ Return ``(A (x) I) u``. """
        return (A @ self._as_array(u)).ravel()

    def along_y(self, A, u):
        """ Return ``(I (x) A) u``. """
        return (A @ self._as_array(u).T).T.ravel()

    def dx(self, u):
        return self.along_x(self.ops_x.D1, u)

    def dxx(self, u):
        return self.along_x(self.ops_x.D2, u)

    def dy(self, u):
        return self.along_y(self.ops_y.D1, u)

    def dyy(self, u):
        return self.along_y(self.ops_y.D2, u)

    @property
    def weights(self):
        """ Diagonal of ``H = H_x (x) H_y`` as flat grid vector. """
        return np.outer(self.ops_x.H.diagonal, self.ops_y.H.diagonal).ravel()

    def kron(self, name):
        """ Return dense Kronecker matrix of 1D operator `name` applied along
        x (``name + '_x'``) or y (``name + '_y'``), e.g. ``'D1_x'``.
        """
        op_name, axis = name.rsplit('_', 1)
        if axis == 'x':
            return sparse.kron(getattr(self.ops_x, op_name),
                               sparse.identity(self.ops_y.n)).toarray()

        return sparse.kron(sparse.identity(self.ops_x.n),
                           getattr(self.ops_y, op_name)).toarray()


def extend_2d(ops_x, ops_y, grid):
    """ Extend 1D operator sets to 2D.

    :param ops_x: :class:`SbpOperatorSet` of x-direction.
    :param ops_y: :class:`SbpOperatorSet` of y-direction.
    :param grid: :class:`anisodiff.grid.Grid2D`.
    :return: :class:`SbpOperators2D`.
    :raises DimensionMismatchError: When operator sizes do not match grid.
    """
    if (ops_x.n, ops_y.n) != grid.shape:
        raise DimensionMismatchError(
            'Operators of size {0}x{1} on {2}x{3} grid.'.format(
                ops_x.n, ops_y.n, *grid.shape))

    return SbpOperators2D(ops_x, ops_y, grid)


def b_first(n):
    """ Return selector ``B_1 = e_1 e_1^T``. """
    return sparse.csr_matrix(([1.], ([0], [0])), shape=(n, n))


def b_last(n):
    """ Return selector ``B_n = e_n e_n^T``. """
    return sparse.csr_matrix(([1.], ([n - 1], [n - 1])), shape=(n, n))


def e_first(n):
    """ Return periodic difference ``E_1 = e_1 (e_1 - e_n)^T``, so
    ``E_1 v = (v_1 - v_n, 0, ..., 0)``.
    """
    return sparse.csr_matrix(([1., -1.], ([0, 0], [0, n - 1])), shape=(n, n))


def e_last(n):
    """ Return periodic difference ``E_n = e_n (e_n - e_1)^T``, so
    ``E_n v = (0, ..., 0, v_n - v_1)``.
    """
    return sparse.csr_matrix(([1., -1.], ([n - 1, n - 1], [n - 1, 0])),
                             shape=(n, n))


class BoundaryProjections(object):
    """ Boundary selectors of a 2D grid, acting on flat grid vectors. """

    def __init__(self, grid):
        self.grid = grid

    def _along_x(self, A, v):
        return (A @ self.grid.as_array(v)).ravel()

    def _along_y(self, A, v):
        return (A @ self.grid.as_array(v).T).T.ravel()

    def B_1x(self, v):
        return self._along_x(b_first(self.grid.gx.n), v)

    def B_nx(self, v):
        return self._along_x(b_last(self.grid.gx.n), v)

    def B_1y(self, v):
        return self._along_y(b_first(self.grid.gy.n), v)

    def B_ny(self, v):
        return self._along_y(b_last(self.grid.gy.n), v)

    def E_1y(self, v):
        return self._along_y(e_first(self.grid.gy.n), v)

    def E_ny(self, v):
        return self._along_y(e_last(self.grid.gy.n), v)


def build_boundary_projections(grid):
    """ Return :class:`BoundaryProjections` of `grid`. """
    return BoundaryProjections(grid)


def apply_1d(A, v):
    """ Apply 1D operator to vector, checking its size. """
    return A @ check_length(v, A.shape[1], 'v')


def dense_dump(ops, path):
    """ Write D1, D2, H and M of `ops` as row-major text files.

    :param ops: :class:`SbpOperatorSet`.
    :param path: Path prefix, the operator name and '.txt' are appended.
    :return: List with paths written.
    """
    paths = []
    for name, matrix in [('D1', ops.D1), ('D2', ops.D2),
                         ('H', sparse.diags(ops.H.diagonal)), ('M', ops.M)]:
        target = '{0}_{1}.txt'.format(path, name)
        utils.dense_dump(matrix, target)
        paths.append(target)

    return paths
