"""
Time stepping
-------------

One step from ``t`` to ``t + dt`` is implicit Euler for the perpendicular
operator followed by implicit Euler for the parallel operator:

1. Solve ``(I - dt P_perp) u_half = u + dt F(t + dt)`` with the boundary data
   at ``t + dt``, by conjugate gradients in the H inner product.
2. ``u_next = parallel_update(u_half)``, a pointwise formula.

``I - dt P_perp = H^-1 (H + dt A)`` is self-adjoint and positive definite in
the H inner product, so the solve is stable for every ``dt > 0``.

"""
import numpy as np

from anisodiff import log, conf
from anisodiff.parallel import parallel_update
from anisodiff.utils import check_length
from anisodiff.exceptions import (ConvergenceError, NonFiniteError,
                                  ConfigError)

PASSED = 'passed'
FAILED = 'failed'
DECLINED = 'declined'


class Problem(object):
    """ Anisotropic diffusion problem.

    :ivar grid: :class:`anisodiff.grid.Grid2D`.
    :ivar perp: :class:`anisodiff.perp.PerpOperator`, holds ``kappa_perp``
        and the boundary data.
    :ivar parallel_map: :class:`anisodiff.parallel.ParallelMap` or None for
        a purely perpendicular problem.
    :ivar penalty: :class:`anisodiff.parallel.ParallelPenalty`.
    :ivar source: Function ``F(x, y, t)`` or None.
    :ivar initial: Function ``f(x, y)`` or None for zero.
    """

    def __init__(self, grid, perp, parallel_map=None, penalty=None,
                 source=None, initial=None):
        if parallel_map is not None and penalty is None:
            raise ConfigError('A parallel map needs a parallel penalty.')

        self.grid = grid
        self.perp = perp
        self.parallel_map = parallel_map
        self.penalty = penalty
        self.source = source
        self.initial = initial

    @property
    def kappa_perp(self):
        return self.perp.kappa_perp

    @property
    def homogeneous(self):
        """ True without source and with zero boundary data. """
        return self.source is None and self.perp.homogeneous


class CGStats(object):
    """ Iterations, final ``||r||_H`` and convergence flag of a CG solve. """

    def __init__(self, iterations, residual, converged):
        self.iterations = iterations
        self.residual = residual
        self.converged = converged

    def __repr__(self):
        return 'CGStats(iterations={0}, residual={1:.3e}, converged={2})' \
            .format(self.iterations, self.residual, self.converged)


class SolverState(object):
    """ Solution at time `t` after `step` steps.

    `diagnostics` has one tuple ``(step, t, H-norm, CG iterations, CG
    residual)`` per step, starting with the initial state. `snapshots` maps
    requested times to copies of the solution.
    """

    def __init__(self, u, t=0., step=0, weights=None, homogeneous=True):
        self.u = u
        self.t = t
        self.step = step
        self.weights = weights
        self.homogeneous = homogeneous
        self.diagnostics = [(step, t, self.h_norm(), 0, 0.)]
        self.snapshots = {}

    def h_norm(self, u=None):
        u = self.u if u is None else u
        if self.weights is None:
            return float(np.linalg.norm(u))

        return float(np.sqrt(np.dot(u, self.weights * u)))

    @property
    def h_norms(self):
        return [row[2] for row in self.diagnostics]

    @property
    def cg_iterations(self):
        return [row[3] for row in self.diagnostics]


def initial_state(problem):
    """ Return state at ``t = 0`` sampled from ``problem.initial``. """
    if problem.initial is None:
        u = np.zeros(problem.grid.size)
    else:
        u = problem.grid.sample(problem.initial)

    return SolverState(u, weights=problem.perp.weights,
                       homogeneous=problem.homogeneous)


def cg_solve_hnorm(apply_A, b, x0, weights, rtol=None, maxit=None):
    """ Solve ``A x = b`` by conjugate gradients in the inner product
    ``<u, v> = u^T H v``.

    `apply_A` must be self-adjoint and positive definite in that inner
    product. Iteration stops when ``||b - A x||_H <= rtol ||x||_H``.

    :param apply_A: Function returning ``A v``.
    :param b: Right hand side.
    :param x0: Initial guess.
    :param weights: Diagonal of ``H``.
    :param rtol: Relative tolerance, default ``conf.CG_RTOL``.
    :param maxit: Iteration cap, default ``conf.CG_MAXIT_FACTOR`` times the
        number of unknowns.
    :return: Tuple ``(x, CGStats)``.
    :raises NonFiniteError: When an iterate is not finite.
    """
    b = np.asarray(b, dtype=float)
    weights = check_length(weights, b.size, 'weights')
    rtol = conf.CG_RTOL if rtol is None else rtol
    maxit = conf.CG_MAXIT_FACTOR * b.size if maxit is None else maxit

    def dot(u, v):
        return np.dot(u, weights * v)

    if not np.any(b):
        return np.zeros_like(b), CGStats(0, 0., True)

    x = check_length(x0, b.size, 'x0').copy()
    r = b - apply_A(x)
    d = r.copy()
    rr = dot(r, r)

    iterations = 0
    while np.sqrt(rr) > rtol * np.sqrt(dot(x, x)) and iterations < maxit:
        Ad = apply_A(d)
        alpha = rr / dot(d, Ad)
        x += alpha * d
        r -= alpha * Ad

        rr_next = dot(r, r)
        d = r + (rr_next / rr) * d
        rr = rr_next
        iterations += 1

        if not np.isfinite(rr):
            raise NonFiniteError('CG iteration {0}.'.format(iterations))

    residual = float(np.sqrt(rr))
    converged = residual <= rtol * np.sqrt(dot(x, x))
    log.debug('CG stopped after {0} iterations with residual {1:.3e}.'
              .format(iterations, residual))

    return x, CGStats(iterations, residual, converged)


def step(problem, state, dt):
    """ Advance `state` in place by `dt`.

    :param problem: :class:`Problem`.
    :param state: :class:`SolverState`.
    :param dt: Time step, positive.
    :return: `state`.
    :raises ConvergenceError: When CG does not converge.
    :raises NonFiniteError: When the new solution is not finite.
    """
    if not dt > 0:
        raise ConfigError('Time step must be positive, got {0}.'.format(dt))

    grid, perp = problem.grid, problem.perp
    t_next = state.t + dt

    rhs = state.u.copy()
    if problem.source is not None:
        rhs += dt * grid.sample(lambda x, y: problem.source(x, y, t_next))

    if perp.kappa_perp > 0:
        if not perp.homogeneous:
            rhs += dt * perp.data_term(perp.boundary_vector(t_next))

        def apply_A(v):
            return v - dt * perp.apply_homogeneous(v)

        u_half, stats = cg_solve_hnorm(apply_A, rhs, state.u, perp.weights)
        if not stats.converged:
            raise ConvergenceError(
                'Step {0} to t = {1}: {2!r}'.format(state.step + 1, t_next,
                                                    stats),
                iterations=stats.iterations, residual=stats.residual)
    else:
        u_half, stats = rhs, CGStats(0, 0., True)

    if problem.parallel_map is not None:
        u_next = parallel_update(u_half, problem.parallel_map,
                                 problem.penalty, dt)
    else:
        u_next = u_half

    if not np.all(np.isfinite(u_next)):
        raise NonFiniteError('Step {0} to t = {1}.'.format(state.step + 1,
                                                           t_next))

    state.u = u_next
    state.t = t_next
    state.step += 1
    state.diagnostics.append((state.step, state.t, state.h_norm(),
                              stats.iterations, stats.residual))

    return state


def run(problem, dt, t_final, snapshots=(), callback=None):
    """ Step from ``t = 0`` to `t_final` with uniform steps `dt`. The last
    step is shortened to land on `t_final`.

    :param problem: :class:`Problem`.
    :param dt: Time step, positive.
    :param t_final: End time, non-negative.
    :param snapshots: Times at which copies of the solution are kept, the
        first step ending at or after a time records it.
    :param callback: Function called with the state after every step; the
        run stops early when it returns True.
    :return: :class:`SolverState`.
    """
    if not dt > 0 or not t_final >= 0:
        raise ConfigError('Need dt > 0 and t_final >= 0, got {0} and {1}.'
                          .format(dt, t_final))

    state = initial_state(problem)
    pending = sorted(snapshots)
    while pending and pending[0] <= state.t:
        state.snapshots[pending.pop(0)] = state.u.copy()

    while state.t < t_final:
        t_next = min((state.step + 1) * dt, t_final)
        if t_final - t_next < 1e-12 * dt:
            t_next = t_final

        step(problem, state, t_next - state.t)
        state.t = t_next

        while pending and pending[0] <= state.t:
            state.snapshots[pending.pop(0)] = state.u.copy()

        if callback is not None and callback(state):
            log.info('Run stopped by callback at t = {0} after {1} steps.'
                     .format(state.t, state.step))
            break

    log.info('Finished {0} steps to t = {1}, H-norm {2:.6e}.'.format(
        state.step, state.t, state.h_norm()))
    return state


class EnergyReport(object):
    """ Outcome of :func:`energy_audit`. `first_violation` is the first step
    whose H-norm exceeds that of the step before, or None.
    """

    def __init__(self, status, first_violation=None):
        self.status = status
        self.first_violation = first_violation

    @property
    def passed(self):
        return self.status == PASSED

    def __repr__(self):
        return 'EnergyReport(status={0!r}, first_violation={1})'.format(
            self.status, self.first_violation)


def energy_audit(state, tol=1e-12):
    """ Check that the H-norm never grows from one step to the next.

    :param state: :class:`SolverState` of a finished run.
    :param tol: Allowed relative growth per step.
    :return: :class:`EnergyReport`.
    """
    if not state.homogeneous:
        return EnergyReport(DECLINED)

    norms = state.h_norms
    for k in range(1, len(norms)):
        if norms[k] > norms[k - 1] * (1 + tol):
            log.warning('H-norm grew from {0:.16e} to {1:.16e} in step {2}.'
                        .format(norms[k - 1], norms[k], k))
            return EnergyReport(FAILED, k)

    return EnergyReport(PASSED)


def write_diagnostics(state, path):
    """ Write per-step diagnostics as tab separated text. """
    with open(path, 'w') as f:
        f.write('step\tt\th_norm\tcg_iterations\tcg_residual\n')
        for k, t, norm, iterations, residual in state.diagnostics:
            f.write('{0}\t{1:.16e}\t{2:.16e}\t{3}\t{4:.16e}\n'.format(
                k, t, norm, iterations, residual))
