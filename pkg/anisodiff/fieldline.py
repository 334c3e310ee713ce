"""
Field line tracing
------------------

Field lines are integral curves of

    d(x, y) / d(phi) = B(x, y, phi),  (x, y)(0) = (x_0, y_0),

with ``phi`` a time-like variable. For a toroidal field ``phi`` is the
toroidal angle ``zeta`` and one transit spans one period. For an in-plane
field ``B = z x grad(psi)`` lines follow contours of ``psi`` and ``phi`` is
just a parameter along the line.

Integration uses :func:`scipy.integrate.solve_ivp` with the embedded
Runge-Kutta pair ``conf.TRACE_METHOD``. Forward traces run from 0 to
``+span``, backward traces from 0 to ``-span``. A terminal event stops the
integration when a line crosses a non-periodic boundary by more than a
margin, see :func:`landing_margins`. Landing points within the margin are
clamped onto the boundary. Boundary nodes of a field tangent to the wall,
like the separatrix of the NIMROD field, stay on it this way.

"""
from multiprocessing import Pool

import numpy as np
import sympy
from scipy.integrate import solve_ivp

from anisodiff import log, conf
from anisodiff.utils import memoize
from anisodiff.parallel import ParallelMap
from anisodiff.exceptions import (LeftDomainError, ConfigError,
                                  ConvergenceError)

CONVERGED = 'converged'
LEFT_DOMAIN = 'left-domain'

NIMROD_DOMAIN = ((-0.5, 0.5), (-0.5, 0.5))
SLAB_DOMAIN = ((0., 1.), (-np.pi, np.pi))
SLAB_MODES = ((2, 1, 1.05e-3), (3, 2, 0.7e-3))

psi, theta, zeta = sympy.symbols('psi theta zeta')
x, y = sympy.symbols('x y')


class MagneticField(object):
    """ Base class of fields whose lines are traced.

    :ivar domain: Pair ``((x_left, x_right), (y_left, y_right))`` or None.
    :ivar periodic_y: True when y is periodic on the domain.
    :ivar period: Extent in ``phi`` of one transit, None for in-plane fields.
    """
    period = None

    def __init__(self, domain=None, periodic_y=False):
        self.domain = domain
        self.periodic_y = periodic_y

    def evaluate(self, x, y, phi):
        """ Return tangent ``(dx/dphi, dy/dphi)`` at ``(x, y, phi)``. """
        raise NotImplementedError

    def rhs(self, phi, state):
        """ Right hand side in the form :func:`solve_ivp` expects. """
        dx, dy = self.evaluate(state[0], state[1], phi)
        return np.array([dx, dy], dtype=float)

    def _key(self):
        return (type(self).__name__, self.domain, self.periodic_y)

    def __eq__(self, other):
        return isinstance(other, MagneticField) and \
            self._key() == other._key()

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self._key())


class UniformField(MagneticField):
    """ Constant field ``(b_x, b_y)``. """

    def __init__(self, b_x, b_y, domain=None, periodic_y=False):
        super(UniformField, self).__init__(domain, periodic_y)
        self.b_x = float(b_x)
        self.b_y = float(b_y)

    def evaluate(self, x, y, phi):
        shape = np.broadcast(x, y).shape
        return np.full(shape, self.b_x), np.full(shape, self.b_y)

    def _key(self):
        return super(UniformField, self)._key() + (self.b_x, self.b_y)


class SymbolicField(MagneticField):
    """ Field derived from a sympy expression. Compiled functions are
    rebuilt after unpickling.
    """

    def __init__(self, expression, domain=None, periodic_y=False):
        super(SymbolicField, self).__init__(domain, periodic_y)
        self.expression = sympy.sympify(expression)
        self._compile()

    def _compile(self):
        raise NotImplementedError

    def __getstate__(self):
        state = self.__dict__.copy()
        for name in ('_tangent', 'flux'):
            state.pop(name, None)
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._compile()

    def evaluate(self, x, y, phi):
        shape = np.broadcast(x, y).shape
        return tuple(np.broadcast_to(np.asarray(f(x, y, phi), dtype=float),
                                     shape) for f in self._tangent)

    def _key(self):
        return super(SymbolicField, self)._key() + \
            (sympy.srepr(self.expression),)


class InPlaneField(SymbolicField):
    """ In-plane field ``B = z x grad(psi) = (-d psi/dy, d psi/dx)`` of a
    flux function ``psi(x, y)`` in the sympy symbols ``x`` and ``y``.
    """

    def _compile(self):
        args = [x, y, zeta]
        self._tangent = (
            sympy.lambdify(args, -sympy.diff(self.expression, y), 'numpy'),
            sympy.lambdify(args, sympy.diff(self.expression, x), 'numpy'))
        self.flux = sympy.lambdify([x, y], self.expression, 'numpy')


class HamiltonianField(SymbolicField):
    """ Field of a Hamiltonian ``chi(psi, theta, zeta)``, with ``x = psi`` and
    ``y = theta``::

        d theta / d zeta = d chi / d psi
        d psi / d zeta = -d chi / d theta

    """
    period = 2 * np.pi

    def _compile(self):
        args = [psi, theta, zeta]
        self._tangent = (
            sympy.lambdify(args, -sympy.diff(self.expression, theta),
                           'numpy'),
            sympy.lambdify(args, sympy.diff(self.expression, psi), 'numpy'))


def zero_field(domain=None, periodic_y=False):
    """ Return stationary field, every line is a point. """
    return UniformField(0., 0., domain, periodic_y)


def nimrod_flux(x_, y_):
    """ Return ``psi = cos(pi x) cos(pi y)``. """
    return np.cos(np.pi * x_) * np.cos(np.pi * y_)


def nimrod_field():
    """ Return in-plane field of ``psi = cos(pi x) cos(pi y)`` on
    ``[-1/2, 1/2]^2``. Its lines are closed contours of ``psi`` around the
    O-point at the origin.
    """
    return InPlaneField(sympy.cos(sympy.pi * x) * sympy.cos(sympy.pi * y),
                        domain=NIMROD_DOMAIN)


def slab_field(epsilons=SLAB_MODES):
    """ Return field of the perturbed slab Hamiltonian

        chi = psi^2 / 2 + sum eps psi (psi - 1) cos(m theta - n zeta)

    on ``(psi, theta)`` in ``[0, 1] x [-pi, pi]``, periodic in ``theta``.

    :param epsilons: Sequence of ``(m, n, eps)``, default ``(2, 1, 1.05e-3)``
        and ``(3, 2, 0.7e-3)``, which give island chains at ``psi = 1/2`` and
        ``psi = 2/3``.
    :return: :class:`HamiltonianField`.
    """
    chi = psi ** 2 / 2
    for m, n, eps in epsilons:
        chi += sympy.nsimplify(eps) * psi * (psi - 1) * \
            sympy.cos(m * theta - n * zeta)

    return HamiltonianField(chi, domain=SLAB_DOMAIN, periodic_y=True)


def default_span(field):
    """ Return one period of `field`, or 2 pi for in-plane fields. """
    return field.period if field.period is not None else 2 * np.pi


class TraceResult(object):
    """ Landing points of a forward and a backward trace.

    :ivar x_plus: Forward landing point ``(x, y)``.
    :ivar x_minus: Backward landing point ``(x, y)``.
    :ivar status: 'converged' or 'left-domain'.
    :ivar steps: Accepted integrator steps of both traces.
    """

    def __init__(self, x_plus, x_minus, status, steps):
        self.x_plus = x_plus
        self.x_minus = x_minus
        self.status = status
        self.steps = steps

    @property
    def converged(self):
        return self.status == CONVERGED

    def __repr__(self):
        return 'TraceResult(x_plus={0}, x_minus={1}, status={2!r}, ' \
            'steps={3})'.format(self.x_plus, self.x_minus, self.status,
                                self.steps)


def landing_margins(domain, rtol, atol):
    """ Return per axis distance a trace may overshoot a boundary of
    `domain` and still count as inside.

    The margin is ``conf.BOUNDARY_TOL`` times the interval length, widened to
    ten times the integration error ``max(atol, rtol * max(|left|,
    |right|))``.
    """
    margins = []
    for left, right in domain:
        error = max(atol, rtol * max(abs(left), abs(right)))
        margins.append(max(conf.BOUNDARY_TOL * (right - left), 10 * error))

    return margins


def _leave_events(field, domain, margins):
    """ Return terminal events for non-periodic boundaries of `domain`. """
    if domain is None:
        return []

    axes = [0] if field.periodic_y else [0, 1]
    events = []
    for axis in axes:
        left, right = domain[axis]
        margin = margins[axis]

        def inside(phi, state, axis=axis, left=left, right=right,
                   margin=margin):
            return min(state[axis] - left, right - state[axis]) + margin

        inside.terminal = True
        inside.direction = -1
        events.append(inside)

    return events


def _wrap(point, field, domain):
    """ Map periodic coordinate into ``[y_left, y_right)``. """
    point = np.array(point, dtype=float)
    if domain is not None and field.periodic_y:
        left, right = domain[1]
        point[1] = left + np.mod(point[1] - left, right - left)

    return point


def _confine(point, field, domain):
    """ Wrap periodic coordinate and clamp the others onto `domain`. """
    point = _wrap(point, field, domain)
    if domain is not None:
        axes = [0] if field.periodic_y else [0, 1]
        for axis in axes:
            point[axis] = np.clip(point[axis], *domain[axis])

    return point


def _integrate(field, start, span, rtol, atol, method, domain):
    events = None
    if domain is not None:
        events = _leave_events(field, domain,
                               landing_margins(domain, rtol, atol)) or None

    solution = solve_ivp(field.rhs, (0., span), np.asarray(start, float),
                         method=method, rtol=rtol, atol=atol, events=events)

    if solution.status == -1:
        raise ConvergenceError('Field line integration failed: {0}'
                               .format(solution.message))

    left = solution.status == 1
    return solution.y[:, -1], left, len(solution.t) - 1


def trace(field, start, span=None, rtol=None, atol=None, domain=None):
    """ Trace field line through `start` forward and backward.

    :param field: :class:`MagneticField`.
    :param start: Start point ``(x, y)``.
    :param span: Extent in ``phi`` of each trace, default one period.
    :param rtol: Relative tolerance, default ``conf.TRACE_RTOL``.
    :param atol: Absolute tolerance, default ``conf.TRACE_ATOL``.
    :param domain: Domain, default ``field.domain``.
    :return: :class:`TraceResult` with landing points clamped onto the
        domain.
    """
    span = default_span(field) if span is None else span
    rtol = conf.TRACE_RTOL if rtol is None else rtol
    atol = conf.TRACE_ATOL if atol is None else atol
    domain = field.domain if domain is None else domain

    if not span > 0 or not rtol > 0 or not atol > 0:
        raise ConfigError('Span and tolerances must be positive.')

    plus, left_plus, steps_plus = _integrate(field, start, span, rtol, atol,
                                             conf.TRACE_METHOD, domain)
    minus, left_minus, steps_minus = _integrate(field, start, -span, rtol,
                                                atol, conf.TRACE_METHOD,
                                                domain)

    status = LEFT_DOMAIN if left_plus or left_minus else CONVERGED
    return TraceResult(_confine(plus, field, domain),
                       _confine(minus, field, domain), status,
                       steps_plus + steps_minus)


def _trace_node(args):
    """ Trace one node. Module level so it pickles for a process pool. """
    field, start, span, rtol, atol, domain = args
    return trace(field, start, span, rtol, atol, domain)


def field_line(field, start, span=None, samples=200):
    """ Return points along the forward field line through `start`.

    :return: Array with shape ``(samples, 2)``.
    """
    span = default_span(field) if span is None else span
    solution = solve_ivp(field.rhs, (0., span), np.asarray(start, float),
                         method=conf.TRACE_METHOD, rtol=conf.TRACE_RTOL,
                         atol=conf.TRACE_ATOL,
                         t_eval=np.linspace(0., span, samples))

    return solution.y.T


def poincare_section(field, seeds, transits, rtol=None, atol=None):
    """ Return Poincare section of `field`: the points where lines through
    `seeds` cross the plane ``phi = 0`` after each transit.

    :param field: :class:`MagneticField` with a period.
    :param seeds: Sequence of start points ``(x, y)``.
    :param transits: Number of transits, at least 1.
    :return: List with one array of shape ``(transits, 2)`` per seed.
    """
    if field.period is None:
        raise ConfigError('Field has no transit period.')

    if transits < 1:
        raise ConfigError('Need at least one transit, got {0}.'
                          .format(transits))

    rtol = conf.TRACE_RTOL if rtol is None else rtol
    atol = conf.TRACE_ATOL if atol is None else atol
    crossings = field.period * np.arange(1, transits + 1)

    sections = []
    for i, seed in enumerate(seeds):
        solution = solve_ivp(field.rhs, (0., crossings[-1]),
                             np.asarray(seed, float), method=conf.TRACE_METHOD,
                             rtol=rtol, atol=atol, t_eval=crossings)
        points = np.array([_wrap(p, field, field.domain)
                           for p in solution.y.T])
        log.debug('Seed {0} at {1} crossed section {2} times.'
                  .format(i, seed, len(points)))
        sections.append(points)

    return sections


@memoize(maxsize=lambda: conf.MAP_CACHE_SIZE)
def _landing_points(grid, field, span, rtol, atol, method, workers):
    domain = ((grid.gx.x_left, grid.gx.x_right),
              (grid.gy.x_left, grid.gy.x_right))
    X, Y = grid.mesh()
    jobs = [(field, (px, py), span, rtol, atol, domain)
            for px, py in zip(X.ravel(), Y.ravel())]

    if workers is not None and workers > 1:
        pool = Pool(processes=workers)
        try:
            results = pool.map(_trace_node, jobs,
                               chunksize=max(1, len(jobs) // (4 * workers)))
        finally:
            pool.close()
            pool.join()
    else:
        results = [_trace_node(job) for job in jobs]

    for k, result in enumerate(results):
        if not result.converged:
            raise LeftDomainError('Node {0} at {1} left the domain.'
                                  .format(k, jobs[k][1]), node=k)

    forward = np.array([r.x_plus for r in results])
    backward = np.array([r.x_minus for r in results])
    log.info('Traced {0} nodes with {1} steps in total.'.format(
        len(results), sum(r.steps for r in results)))

    return forward, backward


def build_parallel_map(grid, field, span=None, rtol=None, atol=None,
                       workers=None):
    """ Trace every grid node forward and backward and return the parallel
    map of the landing points.

    Results are cached in-process per grid, field, span, tolerances and
    integration method.

    :param grid: :class:`anisodiff.grid.Grid2D`.
    :param field: :class:`MagneticField`, ``field.periodic_y`` decides
        whether y is periodic.
    :param span: Extent in ``phi``, default one period.
    :param rtol: Relative tolerance, default ``conf.TRACE_RTOL``.
    :param atol: Absolute tolerance, default ``conf.TRACE_ATOL``.
    :param workers: Number of processes, default traces serially.
    :return: :class:`anisodiff.parallel.ParallelMap`.
    :raises LeftDomainError: When a node's field line leaves the domain.
    """
    span = default_span(field) if span is None else float(span)
    rtol = conf.TRACE_RTOL if rtol is None else rtol
    atol = conf.TRACE_ATOL if atol is None else atol
    if not span > 0:
        raise ConfigError('Span must be positive, got {0}.'.format(span))

    forward, backward = _landing_points(grid, field, span, rtol, atol,
                                        conf.TRACE_METHOD, workers)

    return ParallelMap.from_landing(grid, forward, backward,
                                    periodic_y=field.periodic_y)
