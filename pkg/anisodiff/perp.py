"""
Perpendicular diffusion
-----------------------

The perpendicular operator

    P u = kappa (D2_x (x) I + I (x) D2_y) u + SAT_x + SAT_y

imposes boundary conditions weakly through simultaneous approximation terms
(SATs). In x both boundaries are Dirichlet. In y the boundaries are either
periodic (the default) or Dirichlet.

Dirichlet SAT at the x boundaries, with residual ``v = u - g``::

    SAT_x = H_x^-1 (tau_x0 kappa (B_1 + B_n) H_x^-1 (B_1 + B_n) v
                    + tau_x1 kappa S^T (B_1 - B_n) v)

Periodic SAT in y::

    SAT_y = H_y^-1 (tau_y0 (E_1 + E_n) u
                    + tau_y1 kappa S^T (E_n - E_1) u
                    + tau_y2 (E_n - E_1) kappa S u)

``S`` is the boundary derivative of the fully compatible SBP operators, the
boundary rows of ``D1``. With the penalties of :func:`default_penalties` the
homogeneous operator is ``P = -H^-1 A`` with ``A`` symmetric positive
semi-definite.

The 1D operators are built with unit diffusivity. The homogeneous part of
``P`` is the sum of two Kronecker products of sparse 1D matrices that is
never assembled.

"""
import numpy as np
from scipy import sparse
from scipy.linalg import eigvalsh

from anisodiff import log, conf, utils
from anisodiff.sbp import build_sbp, extend_2d, b_first, b_last
from anisodiff.utils import check_length
from anisodiff.exceptions import (PenaltyError, DiffusivityError,
                                  AuditRefusedError, DimensionMismatchError,
                                  ConfigError)

Y_BOUNDARIES = ('periodic', 'dirichlet')


class PenaltySet(object):
    """ Penalty parameters of the SATs.

    ``tau_x0``, ``tau_x1`` and ``tau_x2`` are dimensionless, ``tau_y0`` has
    units of diffusivity over length.
    """

    def __init__(self, tau_x2=0., tau_y0=0., tau_x0=None, tau_x1=-1.,
                 tau_y1=0.5, tau_y2=-0.5):
        if tau_x2 < 0:
            raise PenaltyError('tau_x2 = {0} is negative.'.format(tau_x2))

        if tau_x0 is None:
            tau_x0 = -(1. + tau_x2)

        if not np.isclose(tau_x0, -(1. + tau_x2)) or tau_x1 != -1.:
            raise PenaltyError('Need tau_x1 = -1 and tau_x0 = -(1 + tau_x2).')

        if tau_y1 != 0.5 or tau_y2 != -0.5:
            raise PenaltyError('Need tau_y1 = 1/2 and tau_y2 = -1/2.')

        if tau_y0 > 0:
            raise PenaltyError('tau_y0 = {0} is positive.'.format(tau_y0))

        self.tau_x0 = float(tau_x0)
        self.tau_x1 = float(tau_x1)
        self.tau_x2 = float(tau_x2)
        self.tau_y0 = float(tau_y0)
        self.tau_y1 = float(tau_y1)
        self.tau_y2 = float(tau_y2)

    def replace(self, **changes):
        """ Return copy with some parameters changed. """
        values = dict(tau_x2=self.tau_x2, tau_y0=self.tau_y0)
        values.update(changes)
        return PenaltySet(**values)

    def __repr__(self):
        return ('PenaltySet(tau_x0={0}, tau_x1={1}, tau_x2={2}, tau_y0={3}, '
                'tau_y1={4}, tau_y2={5})').format(
                    self.tau_x0, self.tau_x1, self.tau_x2, self.tau_y0,
                    self.tau_y1, self.tau_y2)


def tau_y0_bound(grid, kappa_perp, order):
    """ Return ``-(kappa / (2 dy)) max(1 / h_1, 1 / h_n)``, a periodic
    penalty for which fully compatible operators give a semi-definite ``A``.
    """
    h = build_sbp(order, grid.gy.n, grid.gy.dx).H.h
    return -kappa_perp / (2 * grid.gy.dx) * max(1 / h[0], 1 / h[-1])


def default_penalties(grid, kappa_perp, order, tau_x2=0.):
    """ Return penalties for which the perpendicular operator is negative
    semi-definite in the H inner product, with ``tau_y0`` from
    :func:`tau_y0_bound`.

    :param grid: :class:`anisodiff.grid.Grid2D`.
    :param kappa_perp: Perpendicular diffusivity, non-negative.
    :param order: Accuracy order, 2 or 4.
    :param tau_x2: Non-negative extra Dirichlet penalty, default 0.
    :return: :class:`PenaltySet`.
    :raises PenaltyError: When `tau_x2` is negative.
    :raises DiffusivityError: When `kappa_perp` is negative.
    """
    if kappa_perp < 0:
        raise DiffusivityError('kappa_perp = {0} is negative.'
                               .format(kappa_perp))

    return PenaltySet(tau_x2=tau_x2,
                      tau_y0=tau_y0_bound(grid, kappa_perp, order))


class DirichletData(object):
    """ Boundary values ``g(s, t)`` along the edges of the domain.

    `left` and `right` are functions of ``(y, t)``, `bottom` and `top` of
    ``(x, t)``. The latter are only used with Dirichlet boundaries in y.
    Missing edges have zero data. When `exact` is given, a function of
    ``(x, y, t)``, every edge takes its trace.
    """

    def __init__(self, left=None, right=None, bottom=None, top=None,
                 exact=None):
        self.left = left
        self.right = right
        self.bottom = bottom
        self.top = top
        self.exact = exact

    @classmethod
    def constant(cls, left=0., right=0., bottom=0., top=0.):
        """ Return data with constant value on every edge. """
        def const(value):
            return lambda s, t: np.full(np.shape(s), value, dtype=float)

        return cls(const(left), const(right), const(bottom), const(top))

    @classmethod
    def from_exact(cls, exact):
        """ Return data taken from the trace of ``exact(x, y, t)``. """
        return cls(exact=exact)

    def _edges(self, grid):
        x, y = grid.x, grid.y
        if self.exact is not None:
            exact = self.exact
            return (lambda s, t: exact(x[0], s, t),
                    lambda s, t: exact(x[-1], s, t),
                    lambda s, t: exact(s, y[0], t),
                    lambda s, t: exact(s, y[-1], t))

        return self.left, self.right, self.bottom, self.top

    def vector(self, grid, t, y_boundary='periodic'):
        """ Return full-length grid vector with boundary values at time `t`,
        zero in the interior.
        """
        G = np.zeros(grid.shape)
        x, y = grid.x, grid.y
        left, right, bottom, top = self._edges(grid)

        def edge(f, s):
            if f is None:
                return 0.
            return np.broadcast_to(np.asarray(f(s, t), dtype=float), s.shape)

        if y_boundary == 'dirichlet':
            G[:, 0], G[:, -1] = edge(bottom, x), edge(top, x)

        G[0, :], G[-1, :] = edge(left, y), edge(right, y)

        return G.ravel()


def _dirichlet_sat(ops, tau_x0, tau_x1):
    """ Return 1D Dirichlet SAT matrix for unit diffusivity, acting on the
    residual ``u - g``.
    """
    n = ops.n
    B1, Bn = b_first(n), b_last(n)
    Hinv = sparse.diags(1 / ops.H.diagonal)

    zeroth = tau_x0 * (B1 + Bn) @ Hinv @ (B1 + Bn)
    first = tau_x1 * ops.S.T @ (B1 - Bn)

    return (Hinv @ (zeroth + first)).tocsr()


def _periodic_sat(ops, tau_y0, tau_y1, tau_y2, kappa):
    """ Return 1D periodic SAT matrix, with `tau_y0` already scaled by
    diffusivity and ``kappa`` multiplying the derivative terms.
    """
    n = ops.n
    a = np.zeros(n)
    b = np.zeros(n)
    a[[0, -1]] = 1., 1.
    b[[0, -1]] = 1., -1.

    # E_1 + E_n = b b^T and E_n - E_1 = -a b^T
    values = tau_y0 * np.outer(b, b) + \
        tau_y1 * kappa * ops.S.T.toarray() @ (-np.outer(a, b)) + \
        tau_y2 * kappa * (-np.outer(a, b)) @ ops.S.toarray()

    return (sparse.diags(1 / ops.H.diagonal) @
            sparse.csr_matrix(values)).tocsr()


class PerpOperator(object):
    """ Matrix-free perpendicular diffusion operator.

    :ivar grid: :class:`anisodiff.grid.Grid2D`.
    :ivar ops: :class:`anisodiff.sbp.SbpOperators2D` with unit diffusivity.
    :ivar penalties: :class:`PenaltySet`.
    :ivar kappa_perp: Perpendicular diffusivity.
    :ivar data: :class:`DirichletData` or None for homogeneous data.
    :ivar y_boundary: 'periodic' or 'dirichlet'.
    """

    def __init__(self, grid, ops, penalties, kappa_perp, data=None,
                 y_boundary='periodic'):
        if kappa_perp < 0:
            raise DiffusivityError('kappa_perp = {0} is negative.'
                                   .format(kappa_perp))

        if y_boundary not in Y_BOUNDARIES:
            raise ConfigError('Unknown y boundary {0!r}.'.format(y_boundary))

        self.grid = grid
        self.ops = ops
        self.penalties = penalties
        self.kappa_perp = float(kappa_perp)
        self.data = data
        self.y_boundary = y_boundary

        ops_x, ops_y = ops.ops_x, ops.ops_y
        p = penalties
        self.sat_x = self.kappa_perp * \
            _dirichlet_sat(ops_x, p.tau_x0, p.tau_x1)

        if y_boundary == 'periodic':
            self.sat_y = _periodic_sat(ops_y, p.tau_y0, p.tau_y1, p.tau_y2,
                                       self.kappa_perp)
        else:
            self.sat_y = self.kappa_perp * \
                _dirichlet_sat(ops_y, p.tau_x0, p.tau_x1)

        self.L_x = (self.kappa_perp * ops_x.D2 + self.sat_x).tocsr()
        self.L_y = (self.kappa_perp * ops_y.D2 + self.sat_y).tocsr()

    @property
    def weights(self):
        """ Diagonal of ``H`` as flat grid vector. """
        return self.ops.weights

    @property
    def homogeneous(self):
        return self.data is None

    def boundary_vector(self, t):
        """ Return boundary data vector ``g`` at time `t`: values on the
        boundary slots, zero elsewhere.
        """
        if self.data is None:
            return np.zeros(self.grid.size)

        return self.data.vector(self.grid, t, self.y_boundary)

    def apply_homogeneous(self, u):
        """ Return ``P u`` for zero boundary data. """
        u = check_length(u, self.grid.size)
        return self.ops.along_x(self.L_x, u) + self.ops.along_y(self.L_y, u)

    def data_term(self, g):
        """ Return the part of ``P u`` driven by boundary data `g`. """
        g = check_length(g, self.grid.size, 'g')
        term = -self.ops.along_x(self.sat_x, g)
        if self.y_boundary == 'dirichlet':
            term -= self.ops.along_y(self.sat_y, g)

        return term

    def dense_operator(self):
        """ Return dense ``A = -H P`` of the homogeneous operator.

        :raises AuditRefusedError: When the grid has more unknowns than
            ``conf.DENSE_AUDIT_CAP``.
        """
        if self.grid.size > conf.DENSE_AUDIT_CAP:
            raise AuditRefusedError(
                '{0} unknowns, cap is {1}.'.format(self.grid.size,
                                                   conf.DENSE_AUDIT_CAP))

        n_x, n_y = self.grid.shape
        P = sparse.kron(self.L_x, sparse.identity(n_y)) + \
            sparse.kron(sparse.identity(n_x), self.L_y)

        return -(self.weights[:, None] * P.toarray())


def build_perp(grid, order, kappa_perp, penalties=None, data=None,
               y_boundary='periodic'):
    """ Build perpendicular operator on `grid`.

    :param grid: :class:`anisodiff.grid.Grid2D`.
    :param order: Accuracy order, 2 or 4.
    :param kappa_perp: Perpendicular diffusivity, non-negative.
    :param penalties: :class:`PenaltySet`, default from
        :func:`default_penalties`.
    :param data: :class:`DirichletData`, default homogeneous.
    :param y_boundary: 'periodic' or 'dirichlet'.
    :return: :class:`PerpOperator`.
    """
    if penalties is None:
        penalties = default_penalties(grid, kappa_perp, order)

    ops_x = build_sbp(order, grid.gx.n, grid.gx.dx)
    ops_y = build_sbp(order, grid.gy.n, grid.gy.dx)
    op = PerpOperator(grid, extend_2d(ops_x, ops_y, grid), penalties,
                      kappa_perp, data, y_boundary)

    log.debug('Built order {0} perpendicular operator on {1}x{2} grid with '
              '{3!r}.'.format(order, grid.gx.n, grid.gy.n, penalties))
    return op


def apply_sat_x(op, u, g, t=None):
    """ Return Dirichlet SAT in x for residual ``u - g``.

    :param op: :class:`PerpOperator`.
    :param u: Flat grid vector.
    :param g: Boundary data vector, see :meth:`PerpOperator.boundary_vector`.
    :param t: Time, unused since `g` is given at that time already.
    :return: Flat grid vector.
    """
    size = op.grid.size
    residual = check_length(u, size) - check_length(g, size, 'g')
    return op.ops.along_x(op.sat_x, residual)


def apply_sat_y(op, u, g=None):
    """ Return SAT in y. For Dirichlet y boundaries `g` holds the data. """
    u = check_length(u, op.grid.size)
    if op.y_boundary == 'dirichlet' and g is not None:
        u = u - check_length(g, op.grid.size, 'g')

    return op.ops.along_y(op.sat_y, u)


def apply_perp(op, u, t):
    """ Return ``P u`` including boundary data at time `t`.

    :param op: :class:`PerpOperator`.
    :param u: Flat grid vector.
    :param t: Time.
    :return: Flat grid vector.
    """
    result = op.apply_homogeneous(u)
    if not op.homogeneous:
        result += op.data_term(op.boundary_vector(t))

    return result


class DefinitenessReport(object):
    """ Outcome of :func:`audit_definiteness`. """

    def __init__(self, symmetry_defect, min_eigenvalue, tol, eig_tol):
        self.symmetry_defect = symmetry_defect
        self.min_eigenvalue = min_eigenvalue
        self.passed = symmetry_defect <= tol and min_eigenvalue >= -eig_tol

    def __repr__(self):
        return ('DefinitenessReport(symmetry_defect={0:.2e}, '
                'min_eigenvalue={1:.2e}, passed={2})').format(
                    self.symmetry_defect, self.min_eigenvalue, self.passed)


def audit_definiteness(op, tol=1e-10, eig_tol=None):
    """ Assemble ``A = -H P`` densely and check that it is symmetric positive
    semi-definite.

    :param op: :class:`PerpOperator`.
    :param tol: Tolerance on the symmetry defect.
    :param eig_tol: Tolerance on negative eigenvalues, default `tol`.
    :return: :class:`DefinitenessReport`.
    :raises AuditRefusedError: When grid is larger than
        ``conf.DENSE_AUDIT_CAP``.
    """
    eig_tol = tol if eig_tol is None else eig_tol
    A = op.dense_operator()
    report = DefinitenessReport(
        symmetry_defect=np.abs(A - A.T).max(),
        min_eigenvalue=eigvalsh(0.5 * (A + A.T)).min(),
        tol=tol, eig_tol=eig_tol)

    log.info('Definiteness audit on {0}x{1} grid: {2!r}'.format(
        op.grid.gx.n, op.grid.gy.n, report))
    return report


def truncation_error(op, exact, laplacian, t=0., margin=None):
    """ Return largest interior truncation error of ``P`` applied to a smooth
    field.

    :param op: :class:`PerpOperator` with boundary data matching `exact`.
    :param exact: Function ``u(x, y, t)``.
    :param laplacian: Function returning the Laplacian of `exact`.
    :param t: Time.
    :param margin: Number of points next to each boundary left out, default
        the width of the boundary closure.
    :return: Maximum absolute error.
    """
    if margin is None:
        margin = 1 if op.ops.ops_x.order == 2 else 4

    if min(op.grid.shape) <= 2 * margin:
        raise DimensionMismatchError('Grid too small for margin {0}.'
                                     .format(margin))

    u = op.grid.sample(lambda x, y: exact(x, y, t))
    expected = op.kappa_perp * op.grid.sample(lambda x, y: laplacian(x, y, t))
    error = op.grid.as_array(apply_perp(op, u, t) - expected)

    return float(np.abs(error[margin:-margin, margin:-margin]).max())


def dense_dump(op, path):
    """ Write dense ``A = -H P`` of the homogeneous operator to `path`. """
    utils.dense_dump(op.dense_operator(), path)
