import pytest
import numpy as np

from anisodiff.grid import flat_index
from anisodiff.solver import run
from anisodiff.harness import problems, NIMROD_RESOLUTIONS
from anisodiff.harness.experiments import run_mms, run_nimrod

MMS_RESOLUTIONS = (21, 41, 61, 81)


@pytest.mark.parametrize('order, kappa_perp, minimum', [
    (2, 1., 2.0),
    (4, 1., 3.0),
    (2, 1e-8, 1.8),
    (4, 1e-8, 1.8),
])
def test_manufactured_solution(experiment_config, order, kappa_perp,
                               minimum):
    """ Errors converge at the design order, or at the order of the time
    integrator when kappa_perp is tiny.
    """
    config = experiment_config('mms', order=order,
                               resolutions=MMS_RESOLUTIONS,
                               kappa_perp=(kappa_perp,), dt_coeff=1e-2)
    (table,) = run_mms(config)

    assert table.slope >= minimum, table


@pytest.mark.parametrize('order', [2, 4])
def test_nimrod(experiment_config, order):
    config = experiment_config('nimrod', order=order,
                               resolutions=NIMROD_RESOLUTIONS,
                               kappa_perp=(1., 1e-3, 1e-6, 1e-9),
                               dt_coeff=0.1)
    tables = run_nimrod(config)

    assert len(tables) == 4
    for table in tables:
        assert table.slope >= 0.9, table


@pytest.mark.parametrize('order', [2, 4])
def test_nimrod_with_identity_map(experiment_config, order):
    """ Without interpolation the error is second order. For order 4 the
    first order time integrator with ``dt ~ dx^2`` floors the slope at 2.
    """
    config = experiment_config('nimrod-identity', order=order,
                               resolutions=NIMROD_RESOLUTIONS,
                               kappa_perp=(1., 1e-3, 1e-6), dt_coeff=0.1)
    tables = run_nimrod(config)

    for table in tables:
        assert table.slope >= 1.9, table


@pytest.mark.parametrize('order, minimum', [
    (2, 1.9),
    (4, 2.8),
])
def test_nimrod_identity_steady_state(experiment_config, order, minimum):
    """ With a fixed large step the run reaches the steady state, which
    leaves only the spatial error.
    """
    config = experiment_config('nimrod-identity', order=order,
                               resolutions=NIMROD_RESOLUTIONS,
                               kappa_perp=(1.,), dt=0.1, t_final=4.)
    (table,) = run_nimrod(config)

    assert table.slope >= minimum, table


@pytest.mark.parametrize('order', [2, 4])
def test_nimrod_limit(experiment_config, order):
    config = experiment_config('nimrod-limit', order=order,
                               resolutions=NIMROD_RESOLUTIONS,
                               kappa_perp=(0.,), dt_coeff=0.1)
    (table,) = run_nimrod(config)

    assert table.slope >= 0.9, table


def test_nimrod_value_at_origin():
    """ u(0, 0, t_f) = 1 - exp(-1) for kappa_perp = 1. """
    n = NIMROD_RESOLUTIONS[-1]
    problem, exact = problems.nimrod_problem(n, 2, 1.)
    t_final = 1 / (2 * np.pi ** 2)
    dx = problem.grid.gx.dx

    state = run(problem, 0.1 * dx ** 2, t_final)

    center = flat_index(problem.grid, (n + 1) // 2, (n + 1) // 2)
    assert exact(0., 0., t_final) == pytest.approx(0.632121, abs=1e-6)
    assert state.u[center] == pytest.approx(0.632121, abs=2e-2)
