"""
Benchmark problems.

Manufactured solution on the unit square, periodic in y::

    u = cos(2 pi t) sin(2 pi w_x x + c_x) sin(2 pi w_y y + c_y)

with ``w_x = 7``, ``w_y = 6``, ``c_x = 1``, ``c_y = 0``. Its source
``F = du/dt - kappa lap(u)`` is derived symbolically.

NIMROD benchmark on ``[-1/2, 1/2]^2`` with ``psi = cos(pi x) cos(pi y)``,
``F = -lap(psi) = 2 pi^2 psi`` and zero boundary values. The exact solution
is ``(1 - exp(-2 kappa pi^2 t)) psi / kappa``, and ``2 pi^2 t psi`` for
``kappa = 0``.

Slab on ``(psi, theta)`` in ``[0, 1] x [-pi, pi]``, temperature 0 at
``psi = 0`` and 1 at ``psi = 1``, periodic in ``theta``, initially ``T =
psi``.

"""
import numpy as np
import sympy
from sympy.abc import x, y, t

from anisodiff.grid import make_grid_2d
from anisodiff.perp import build_perp, DirichletData
from anisodiff.parallel import ParallelPenalty, identity_map
from anisodiff.fieldline import (build_parallel_map, nimrod_field,
                                 nimrod_flux, slab_field, SLAB_MODES,
                                 NIMROD_DOMAIN, SLAB_DOMAIN)
from anisodiff.solver import Problem


def manufactured_solution(omega_x=7, omega_y=6, c_x=1, c_y=0):
    """ Return sympy expression of the manufactured solution in ``x``, ``y``
    and ``t``.
    """
    return sympy.cos(2 * sympy.pi * t) * \
        sympy.sin(2 * sympy.pi * omega_x * x + c_x) * \
        sympy.sin(2 * sympy.pi * omega_y * y + c_y)


def source_term(expression, kappa_perp):
    """ Return ``du/dt - kappa (d2u/dx2 + d2u/dy2)`` of `expression`. """
    return sympy.diff(expression, t) - kappa_perp * \
        (sympy.diff(expression, x, 2) + sympy.diff(expression, y, 2))


def lambdify(expression):
    """ Return numpy function of ``(x, y, t)``. """
    return sympy.lambdify([x, y, t], expression, 'numpy')


def mms_problem(n, order, kappa_perp, expression=None):
    """ Return manufactured solution problem on an ``n x n`` grid and the
    exact solution as function of ``(x, y, t)``.
    """
    expression = manufactured_solution() if expression is None \
        else expression
    exact = lambdify(expression)

    grid = make_grid_2d(0., 1., n, 0., 1., n)
    perp = build_perp(grid, order, kappa_perp,
                      data=DirichletData.from_exact(exact))
    problem = Problem(grid, perp,
                      source=lambdify(source_term(expression, kappa_perp)),
                      initial=lambda x_, y_: exact(x_, y_, 0.))

    return problem, exact


def nimrod_exact(kappa_perp):
    """ Return exact NIMROD solution as function of ``(x, y, t)``. """
    if kappa_perp == 0:
        return lambda x_, y_, t_: 2 * np.pi ** 2 * t_ * nimrod_flux(x_, y_)

    def exact(x_, y_, t_):
        decay = -np.expm1(-2 * kappa_perp * np.pi ** 2 * t_)
        return decay * nimrod_flux(x_, y_) / kappa_perp

    return exact


def nimrod_problem(n, order, kappa_perp, identity=False, kappa_par=1.,
                   rtol=None, atol=None, workers=None):
    """ Return NIMROD problem on an ``n x n`` grid and its exact solution.

    :param identity: Use the identity parallel map instead of traced field
        lines.
    """
    (x_left, x_right), (y_left, y_right) = NIMROD_DOMAIN
    grid = make_grid_2d(x_left, x_right, n, y_left, y_right, n)
    perp = build_perp(grid, order, kappa_perp, y_boundary='dirichlet')

    if identity:
        parallel_map = identity_map(grid)
    else:
        parallel_map = build_parallel_map(grid, nimrod_field(), rtol=rtol,
                                          atol=atol, workers=workers)

    problem = Problem(grid, perp, parallel_map,
                      ParallelPenalty.default(grid, kappa_par),
                      source=lambda x_, y_, t_: 2 * np.pi ** 2 *
                      nimrod_flux(x_, y_))

    return problem, nimrod_exact(kappa_perp)


def slab_problem(n, order, kappa_perp, kappa_par=1., epsilons=SLAB_MODES,
                 rtol=None, atol=None, workers=None):
    """ Return slab problem on an ``n x n`` grid. """
    (x_left, x_right), (y_left, y_right) = SLAB_DOMAIN
    grid = make_grid_2d(x_left, x_right, n, y_left, y_right, n)
    perp = build_perp(grid, order, kappa_perp,
                      data=DirichletData.constant(left=0., right=1.))
    parallel_map = build_parallel_map(grid, slab_field(epsilons), rtol=rtol,
                                      atol=atol, workers=workers)

    return Problem(grid, perp, parallel_map,
                   ParallelPenalty.default(grid, kappa_par),
                   initial=lambda x_, y_: x_ + 0 * y_)
