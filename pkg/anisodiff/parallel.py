"""
Parallel diffusion
------------------

The parallel map moves grid values one transit along field lines. Every node
``k`` has a forward and a backward stencil record: the four corners of the
grid cell containing its landing point and the bilinear weights of that
point within the cell. A record fuses following the line and interpolating,
so

    (P_f u)_k = sum_c w_kc u_(corner kc).

Weights are non-negative and sum to one. On a node or an edge the weights
degenerate to one or two nonzero entries.

The parallel operator is the penalty

    P_par u = -tau kappa (u - (P_f u + P_b u) / 2)

with ``tau = L_x L_y / sqrt(dx dy)``. Its implicit Euler step is diagonal,
see :func:`parallel_update`.

Map files are ``.npz`` archives with entries ``version``, ``grid``
(``x_left, x_right, n_x, y_left, y_right, n_y``), ``periodic_y`` and
``forward_corners``, ``forward_weights``, ``backward_corners``,
``backward_weights`` (integer and float arrays of shape ``(N, 4)``).

"""
import numpy as np
from scipy import sparse
from scipy.sparse.linalg import eigsh

from anisodiff import log, conf
from anisodiff.grid import Grid1D, Grid2D
from anisodiff.utils import check_length
from anisodiff.exceptions import (ParallelMapError, LeftDomainError,
                                  DiffusivityError, ConfigError)

MAP_FORMAT_VERSION = 1

FORWARD = 'forward'
BACKWARD = 'backward'


def bilinear_stencil(grid, points, periodic_y=False):
    """ Return corner indices and bilinear weights of landing points.

    :param grid: :class:`anisodiff.grid.Grid2D`.
    :param points: Array of shape ``(N, 2)`` with landing points.
    :param periodic_y: Wrap y into ``[y_left, y_right)``.
    :return: Tuple ``(corners, weights)``, both of shape ``(N, 4)``, corners
        ordered ``(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)``.
    :raises LeftDomainError: When a point lies outside the domain by more
        than ``conf.BOUNDARY_TOL`` times its length.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    n_x, n_y = grid.shape

    fractions = []
    cells = []
    for axis, (g, periodic) in enumerate([(grid.gx, False),
                                          (grid.gy, periodic_y)]):
        s = points[:, axis]
        if periodic:
            s = g.x_left + np.mod(s - g.x_left, g.length)
        else:
            margin = conf.BOUNDARY_TOL * g.length
            outside = (s < g.x_left - margin) | (s > g.x_right + margin)
            if outside.any():
                node = int(np.flatnonzero(outside)[0])
                raise LeftDomainError('Point {0} of node {1} is outside the '
                                      'domain.'.format(points[node], node),
                                      node=node)
            s = np.clip(s, g.x_left, g.x_right)

        scaled = (s - g.x_left) / g.dx
        cell = np.clip(np.floor(scaled).astype(int), 0, g.n - 2)
        fractions.append(np.clip(scaled - cell, 0., 1.))
        cells.append(cell)

    (i, j), (fx, fy) = cells, fractions
    corners = np.column_stack([i * n_y + j, (i + 1) * n_y + j,
                               i * n_y + j + 1, (i + 1) * n_y + j + 1])
    weights = np.column_stack([(1 - fx) * (1 - fy), fx * (1 - fy),
                               (1 - fx) * fy, fx * fy])

    return corners, weights


def _as_matrix(corners, weights, size):
    rows = np.repeat(np.arange(corners.shape[0]), corners.shape[1])
    return sparse.csr_matrix((weights.ravel(), (rows, corners.ravel())),
                             shape=(size, size))


class ParallelMap(object):
    """ Forward and backward stencil records of every grid node.

    :ivar grid: :class:`anisodiff.grid.Grid2D`.
    :ivar periodic_y: True when y is periodic.
    :ivar forward: Tuple ``(corners, weights)`` of forward records.
    :ivar backward: Tuple ``(corners, weights)`` of backward records.
    """

    def __init__(self, grid, forward, backward, periodic_y=False):
        self.grid = grid
        self.periodic_y = periodic_y
        self.forward = tuple(np.asarray(a) for a in forward)
        self.backward = tuple(np.asarray(a) for a in backward)

        for corners, weights in [self.forward, self.backward]:
            if corners.shape != (grid.size, 4) or \
                    weights.shape != (grid.size, 4):
                raise ParallelMapError('Stencil records must have shape '
                                       '({0}, 4).'.format(grid.size))

            if corners.min() < 0 or corners.max() >= grid.size:
                raise ParallelMapError('Corner index outside grid of size '
                                       '{0}.'.format(grid.size))

        self.P_f = _as_matrix(self.forward[0], self.forward[1], grid.size)
        self.P_b = _as_matrix(self.backward[0], self.backward[1], grid.size)

    @classmethod
    def from_landing(cls, grid, forward_points, backward_points,
                     periodic_y=False):
        """ Return map with bilinear stencils of landing points. """
        return cls(grid, bilinear_stencil(grid, forward_points, periodic_y),
                   bilinear_stencil(grid, backward_points, periodic_y),
                   periodic_y)

    def matrix(self, direction):
        if direction == FORWARD:
            return self.P_f
        elif direction == BACKWARD:
            return self.P_b

        raise ConfigError('Unknown direction {0!r}.'.format(direction))

    def audit_weights(self, tol=1e-12):
        """ Return list with violations of the stencil invariants, empty when
        every record is a convex combination of in-grid corners.
        """
        problems = []
        for direction, (corners, weights) in [(FORWARD, self.forward),
                                              (BACKWARD, self.backward)]:
            negative = np.flatnonzero((weights < -tol).any(axis=1))
            if negative.size:
                problems.append('{0}: negative weight at node {1}.'
                                .format(direction, negative[0]))

            sums = np.flatnonzero(np.abs(weights.sum(axis=1) - 1) > tol)
            if sums.size:
                problems.append('{0}: weights of node {1} do not sum to 1.'
                                .format(direction, sums[0]))

        return problems

    def save(self, path):
        """ Write map to `path` as versioned ``.npz`` archive. """
        gx, gy = self.grid.gx, self.grid.gy
        np.savez(path, version=MAP_FORMAT_VERSION,
                 grid=np.array([gx.x_left, gx.x_right, gx.n,
                                gy.x_left, gy.x_right, gy.n]),
                 periodic_y=self.periodic_y,
                 forward_corners=self.forward[0],
                 forward_weights=self.forward[1],
                 backward_corners=self.backward[0],
                 backward_weights=self.backward[1])
        log.debug('Saved parallel map to {0}.'.format(path))


def load_map(path):
    """ Read map written by :meth:`ParallelMap.save`.

    :raises ParallelMapError: When the file has another format version or
        its records violate the stencil invariants.
    """
    with np.load(path) as data:
        if int(data['version']) != MAP_FORMAT_VERSION:
            raise ParallelMapError('{0} has format version {1}, expected {2}.'
                                   .format(path, int(data['version']),
                                           MAP_FORMAT_VERSION))

        x_left, x_right, n_x, y_left, y_right, n_y = data['grid']
        grid = Grid2D(Grid1D(x_left, x_right, int(n_x)),
                      Grid1D(y_left, y_right, int(n_y)))
        parallel_map = ParallelMap(
            grid, (data['forward_corners'], data['forward_weights']),
            (data['backward_corners'], data['backward_weights']),
            bool(data['periodic_y']))

    problems = parallel_map.audit_weights()
    if problems:
        raise ParallelMapError('{0}: {1}'.format(path, ' '.join(problems)))

    return parallel_map


def identity_map(grid, periodic_y=False):
    """ Return map of a field aligned with the grid: every node lands on
    itself, ``P_f = P_b = I``.
    """
    corners = np.repeat(np.arange(grid.size)[:, None], 4, axis=1)
    weights = np.zeros((grid.size, 4))
    weights[:, 0] = 1.

    return ParallelMap(grid, (corners, weights), (corners, weights),
                       periodic_y)


def apply_map(parallel_map, direction, u):
    """ Return ``P_f u`` or ``P_b u``.

    :param parallel_map: :class:`ParallelMap`.
    :param direction: 'forward' or 'backward'.
    :param u: Flat grid vector.
    """
    u = check_length(u, parallel_map.grid.size)
    return parallel_map.matrix(direction) @ u


class NormReport(object):
    """ Outcome of :func:`operator_norm_check`.

    :ivar worst_columns: Per direction the node with the largest column sum
        and that sum. With row sums of one, ``||P||_2 ** 2`` is at most this
        sum.
    """

    def __init__(self, problems, norms, h_norms, worst_columns, tol):
        self.problems = problems
        self.norms = norms
        self.h_norms = h_norms
        self.worst_columns = worst_columns
        self.passed = not problems and all(n <= 1 + tol for n in
                                           norms.values())

    def __repr__(self):
        return 'NormReport(problems={0}, norms={1}, h_norms={2}, ' \
            'worst_columns={3}, passed={4})'.format(
                self.problems, self.norms, self.h_norms, self.worst_columns,
                self.passed)


def _spectral_norm(P, samples):
    if P.shape[0] <= conf.DENSE_AUDIT_CAP:
        return float(np.linalg.norm(P.toarray(), 2))

    PtP = (P.T @ P).tocsr()
    largest = eigsh(PtP, k=1, which='LM', maxiter=samples,
                    return_eigenvectors=False)
    return float(np.sqrt(largest[0]))


def identify_periodic(P, grid):
    """ Return `P` acting on the periodic grid, where node ``j = n_y - 1``
    and node ``j = 0`` of every x line are one unknown.

    Rows of the duplicate nodes are dropped and their columns added to the
    columns of ``j = 0``.
    """
    n_x, n_y = grid.shape
    i, j = np.divmod(np.arange(grid.size), n_y)
    kept = j < n_y - 1
    folded = i * (n_y - 1) + np.where(kept, j, 0)

    fold = sparse.csr_matrix((np.ones(grid.size), (np.arange(grid.size),
                                                   folded)),
                             shape=(grid.size, n_x * (n_y - 1)))
    return (P @ fold)[np.flatnonzero(kept)].tocsr()


def operator_norm_check(parallel_map, samples=1000, weights=None,
                        tol=1e-10, identify=None):
    """ Audit stencil records, then compute ``||P_f||`` and ``||P_b||``.

    Norms are computed densely up to ``conf.DENSE_AUDIT_CAP`` unknowns and by
    Lanczos iteration on ``P^T P`` above. With `weights`, the diagonal of
    ``H``, the H-weighted norms ``||H^(1/2) P H^(-1/2)||`` are reported too.
    The pass flag uses the uniform l2 norms.

    :param parallel_map: :class:`ParallelMap`.
    :param samples: Iteration cap above the dense size.
    :param weights: Optional H diagonal as flat grid vector.
    :param tol: Allowed excess over 1.
    :param identify: Measure on the periodic grid, see
        :func:`identify_periodic`. Default ``parallel_map.periodic_y``.
    :return: :class:`NormReport`.
    """
    identify = parallel_map.periodic_y if identify is None else identify
    grid = parallel_map.grid
    problems = parallel_map.audit_weights()
    norms, h_norms, worst_columns = {}, {}, {}
    for direction in (FORWARD, BACKWARD):
        P = parallel_map.matrix(direction)
        columns = np.asarray(abs(P).sum(axis=0)).ravel()
        worst_columns[direction] = (int(columns.argmax()),
                                    float(columns.max()))

        if identify:
            P = identify_periodic(P, grid)
        norms[direction] = _spectral_norm(P, samples)

        if weights is not None:
            root = np.sqrt(check_length(weights, grid.size, 'weights'))
            if identify:
                root = root.reshape(grid.shape)[:, :-1].ravel()
            scaled = sparse.diags(root) @ P @ sparse.diags(1 / root)
            h_norms[direction] = _spectral_norm(scaled.tocsr(), samples)

    report = NormReport(problems, norms, h_norms, worst_columns, tol)
    if report.passed:
        log.info('Parallel map norm check: {0!r}'.format(report))
    else:
        log.warning('Parallel map is no contraction: {0!r}'.format(report))

    return report


def default_tau_par(grid):
    """ Return ``L_x L_y / sqrt(dx dy)``. """
    (L_x, L_y) = grid.lengths
    return L_x * L_y / np.sqrt(grid.gx.dx * grid.gy.dx)


class ParallelPenalty(object):
    """ Penalty strength ``tau_par`` and parallel diffusivity
    ``kappa_par``.
    """

    def __init__(self, tau_par, kappa_par=1.):
        if not tau_par > 0:
            raise DiffusivityError('tau_par = {0} is not positive.'
                                   .format(tau_par))

        if not kappa_par >= 0:
            raise DiffusivityError('kappa_par = {0} is negative.'
                                   .format(kappa_par))

        self.tau_par = float(tau_par)
        self.kappa_par = float(kappa_par)

    @classmethod
    def default(cls, grid, kappa_par=1.):
        return cls(default_tau_par(grid), kappa_par)

    @property
    def strength(self):
        return self.tau_par * self.kappa_par

    def __repr__(self):
        return 'ParallelPenalty(tau_par={0}, kappa_par={1})'.format(
            self.tau_par, self.kappa_par)


def apply_parallel_operator(parallel_map, penalty, u):
    """ Return ``-tau kappa (u - (P_f u + P_b u) / 2)``. """
    u = check_length(u, parallel_map.grid.size)
    mean = 0.5 * (parallel_map.P_f @ u + parallel_map.P_b @ u)
    return -penalty.strength * (u - mean)


def relax(u_half, w_forward, w_backward, c):
    """ Return ``(u_half + c (w_b + w_f) / 2) / (1 + c)``. """
    return (u_half + 0.5 * c * (w_backward + w_forward)) / (1 + c)


def parallel_update(u_half, parallel_map, penalty, dt):
    """ Return implicit Euler step of the parallel operator, which is
    diagonal in ``u`` once the landing values are known::

        u = (1 + c)^-1 (u_half + c (P_b u_half + P_f u_half) / 2)

    with ``c = dt tau kappa``.
    """
    if not dt > 0:
        raise ConfigError('Time step must be positive, got {0}.'.format(dt))

    u_half = check_length(u_half, parallel_map.grid.size)
    return relax(u_half, parallel_map.P_f @ u_half,
                 parallel_map.P_b @ u_half, dt * penalty.strength)


class DissipationReport(object):
    """ Outcome of :func:`parallel_dissipation_check`. """

    def __init__(self, worst, tol):
        self.worst = worst
        self.passed = worst <= tol

    def __repr__(self):
        return 'DissipationReport(worst={0:.2e}, passed={1})'.format(
            self.worst, self.passed)


def parallel_dissipation_check(parallel_map, penalty, weights=None,
                               samples=100, seed=0, tol=1e-10,
                               identify=None):
    """ Check ``u^T (W P_par + (W P_par)^T) u <= tol ||u||^2`` for random
    ``u``, with ``W`` the diagonal `weights` or ``dx dy I``.

    With `identify`, default ``parallel_map.periodic_y``, samples are periodic
    grid functions: the duplicate nodes ``j = n_y - 1`` copy ``j = 0`` and are
    left out of the form.

    :return: :class:`DissipationReport` with the largest ratio found.
    """
    identify = parallel_map.periodic_y if identify is None else identify
    grid = parallel_map.grid
    if weights is None:
        weights = np.full(grid.size, grid.gx.dx * grid.gy.dx)

    weights = check_length(weights, grid.size, 'weights').copy()
    counted = np.ones(grid.shape)
    if identify:
        counted[:, -1] = 0.
        weights *= counted.ravel()

    rng = np.random.RandomState(seed)
    worst = -np.inf
    for _ in range(samples):
        U = rng.standard_normal(grid.shape)
        if identify:
            U[:, -1] = U[:, 0]

        u = U.ravel()
        value = 2 * np.dot(u, weights * apply_parallel_operator(
            parallel_map, penalty, u))
        worst = max(worst, value / np.dot(u, counted.ravel() * u))

    report = DissipationReport(worst, tol)
    log.debug('Parallel dissipation check: {0!r}'.format(report))
    return report
