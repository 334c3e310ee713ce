import pytest
import numpy as np

from anisodiff.grid import make_grid_2d
from anisodiff.parallel import (bilinear_stencil, ParallelMap, load_map,
                                identity_map, apply_map,
                                operator_norm_check, default_tau_par,
                                ParallelPenalty, apply_parallel_operator,
                                relax, parallel_update,
                                parallel_dissipation_check,
                                identify_periodic, FORWARD, BACKWARD)
from anisodiff.exceptions import (LeftDomainError, ParallelMapError,
                                  DiffusivityError, ConfigError)


@pytest.fixture
def grid():
    return make_grid_2d(0., 1., 5, 0., 2., 5)


def test_stencil_on_node(grid):
    """ A point on a node takes its value only. """
    corners, weights = bilinear_stencil(grid, [(0.25, 1.)])

    k = 1 * 5 + 2
    assert dict(zip(corners[0], weights[0]))[k] == pytest.approx(1.)
    assert weights[0].sum() == pytest.approx(1.)


def test_stencil_in_cell_center(grid):
    corners, weights = bilinear_stencil(grid, [(0.125, 0.25)])

    assert list(corners[0]) == [0, 5, 1, 6]
    assert np.allclose(weights[0], 0.25)


def test_stencil_weights(grid):
    """ Weights are bilinear in the position within the cell. """
    corners, weights = bilinear_stencil(grid, [(0.05, 0.1)])

    fx, fy = 0.2, 0.2
    assert np.allclose(weights[0], [(1 - fx) * (1 - fy), fx * (1 - fy),
                                    (1 - fx) * fy, fx * fy])


def test_stencil_reproduces_bilinear_functions(grid):
    """ Interpolation is exact for functions linear in x and y. """
    rng = np.random.RandomState(4)
    points = np.column_stack([rng.uniform(0, 1, 50), rng.uniform(0, 2, 50)])
    corners, weights = bilinear_stencil(grid, points)
    u = grid.sample(lambda x, y: 1 + 2 * x - y + x * y)

    interpolated = (weights * u[corners]).sum(axis=1)
    x, y = points.T
    assert np.allclose(interpolated, 1 + 2 * x - y + x * y)


def test_stencil_on_upper_boundary(grid):
    """ Points on the last grid line use the last cell. """
    corners, weights = bilinear_stencil(grid, [(1., 2.)])

    assert dict(zip(corners[0], weights[0]))[grid.size - 1] == \
        pytest.approx(1.)


def test_stencil_wraps_periodic_y(grid):
    inside = bilinear_stencil(grid, [(0.3, 0.7)], periodic_y=True)
    wrapped = bilinear_stencil(grid, [(0.3, 2.7)], periodic_y=True)

    assert np.array_equal(inside[0], wrapped[0])
    assert np.allclose(inside[1], wrapped[1])


def test_stencil_outside_domain(grid):
    with pytest.raises(LeftDomainError) as e:
        bilinear_stencil(grid, [(0.5, 0.5), (1.1, 0.5)])

    assert e.value.node == 1

    with pytest.raises(LeftDomainError):
        bilinear_stencil(grid, [(0.5, 2.5)])


def test_stencil_within_boundary_tolerance(grid):
    """ Overshoot below the tolerance is clipped to the boundary. """
    corners, weights = bilinear_stencil(grid, [(1. + 1e-12, 0.5)])
    assert np.all(weights >= 0)
    assert weights.sum() == pytest.approx(1.)


def test_identity_map(grid):
    parallel_map = identity_map(grid)
    u = np.arange(grid.size, dtype=float)

    assert np.array_equal(apply_map(parallel_map, FORWARD, u), u)
    assert np.array_equal(apply_map(parallel_map, BACKWARD, u), u)
    assert not parallel_map.audit_weights()


def test_apply_map_with_unknown_direction(grid):
    with pytest.raises(ConfigError):
        apply_map(identity_map(grid), 'sideways', np.zeros(grid.size))


def test_map_with_wrong_shape(grid):
    corners = np.zeros((3, 4), dtype=int)
    weights = np.full((3, 4), 0.25)

    with pytest.raises(ParallelMapError):
        ParallelMap(grid, (corners, weights), (corners, weights))


def test_map_with_corner_outside_grid(grid):
    corners = np.repeat(np.arange(grid.size)[:, None], 4, axis=1)
    weights = np.full((grid.size, 4), 0.25)
    bad_corners = corners.copy()
    bad_corners[7, 2] = grid.size

    with pytest.raises(ParallelMapError):
        ParallelMap(grid, (corners, weights), (bad_corners, weights))


def test_audit_weights(grid):
    """ Negative weights and bad sums are reported. """
    corners = np.repeat(np.arange(grid.size)[:, None], 4, axis=1)
    weights = np.full((grid.size, 4), 0.25)
    bad_weights = weights.copy()
    bad_weights[3] = [1.5, -0.5, 0., 0.]
    bad_weights[4] = [0.5, 0., 0., 0.]

    parallel_map = ParallelMap(grid, (corners, bad_weights),
                               (corners, weights))
    problems = parallel_map.audit_weights()

    assert len(problems) == 2
    assert problems[0].startswith('forward: negative weight at node 3')
    assert 'node 4 do not sum' in problems[1]


def test_save_and_load(tmpdir, grid):
    rng = np.random.RandomState(5)
    points = np.column_stack([rng.uniform(0, 1, grid.size),
                              rng.uniform(0, 2, grid.size)])
    parallel_map = ParallelMap.from_landing(grid, points, points[::-1],
                                            periodic_y=True)
    path = str(tmpdir.join('map.npz'))
    parallel_map.save(path)

    loaded = load_map(path)
    assert loaded.grid == grid
    assert loaded.periodic_y
    assert np.array_equal(loaded.P_f.toarray(), parallel_map.P_f.toarray())
    assert np.array_equal(loaded.P_b.toarray(), parallel_map.P_b.toarray())


def test_load_map_with_other_version(tmpdir, grid):
    path = str(tmpdir.join('map.npz'))
    identity_map(grid).save(path)
    with np.load(path) as data:
        content = dict(data)
    content['version'] = 99
    np.savez(path, **content)

    with pytest.raises(ParallelMapError):
        load_map(path)


def test_load_map_with_invalid_records(tmpdir, grid):
    path = str(tmpdir.join('map.npz'))
    identity_map(grid).save(path)
    with np.load(path) as data:
        content = dict(data)
    content['forward_weights'] = 2 * content['forward_weights']
    np.savez(path, **content)

    with pytest.raises(ParallelMapError):
        load_map(path)


def test_operator_norm_check_of_identity(grid):
    report = operator_norm_check(identity_map(grid), weights=np.ones(25))

    assert report.passed, report
    assert report.norms[FORWARD] == pytest.approx(1.)
    assert report.h_norms[BACKWARD] == pytest.approx(1.)


def reflection_map():
    """ Map ``x -> 1 - x``, which permutes the nodes. """
    grid = make_grid_2d(0., 1., 4, 0., 1., 7)
    X, Y = grid.mesh()
    landing = np.column_stack([1 - X.ravel(), Y.ravel()])
    return ParallelMap.from_landing(grid, landing, landing)


def test_operator_norm_check_of_reflection():
    report = operator_norm_check(reflection_map())

    assert report.passed, report
    assert report.norms[FORWARD] == pytest.approx(1.)


def test_operator_norm_check_detects_bad_records(grid):
    corners = np.zeros((grid.size, 4), dtype=int)
    weights = np.zeros((grid.size, 4))
    weights[:, 0] = 1.
    parallel_map = ParallelMap(grid, (corners, weights), (corners, weights))

    # Every node reads node 0, so the norm is sqrt(N).
    report = operator_norm_check(parallel_map)
    assert not report.passed
    assert report.norms[FORWARD] == pytest.approx(5.)
    assert report.worst_columns[FORWARD] == (0, pytest.approx(25.))


def shift_map():
    """ Periodic shift ``y -> y + dy`` on 3 x 5 nodes. """
    grid = make_grid_2d(0., 1., 3, 0., 1., 5)
    X, Y = grid.mesh()
    landing = np.column_stack([X.ravel(), Y.ravel() + grid.gy.dx])
    back = np.column_stack([X.ravel(), Y.ravel() - grid.gy.dx])
    return ParallelMap.from_landing(grid, landing, back, periodic_y=True)


def test_identify_periodic():
    parallel_map = shift_map()
    P = identify_periodic(parallel_map.P_f, parallel_map.grid).toarray()

    assert P.shape == (12, 12)
    assert np.allclose(P @ P.T, np.eye(12))


def test_operator_norm_check_identifies_periodic_nodes():
    """ On the full grid the duplicate rows j = 0 and j = n - 1 read the
    same node, on the periodic grid the shift is a permutation.
    """
    report = operator_norm_check(shift_map(), weights=np.ones(15))
    assert report.passed, report
    assert report.norms[FORWARD] == pytest.approx(1.)
    assert report.h_norms[BACKWARD] == pytest.approx(1.)

    report = operator_norm_check(shift_map(), identify=False)
    assert not report.passed
    assert report.norms[FORWARD] == pytest.approx(np.sqrt(2.))


def test_default_tau_par():
    grid = make_grid_2d(0., 2., 5, 0., 1., 3)
    assert default_tau_par(grid) == pytest.approx(2. / np.sqrt(0.25))


@pytest.mark.parametrize('tau_par, kappa_par', [(0., 1.), (1., -1.)])
def test_penalty_with_invalid_values(tau_par, kappa_par):
    with pytest.raises(DiffusivityError):
        ParallelPenalty(tau_par, kappa_par)


def test_penalty_strength(grid):
    penalty = ParallelPenalty.default(grid, kappa_par=0.5)
    assert penalty.strength == pytest.approx(0.5 * default_tau_par(grid))


def test_parallel_operator_vanishes_on_invariant_fields(grid):
    """ Values constant along lines are not diffused. """
    penalty = ParallelPenalty(3., 2.)
    u = np.random.RandomState(6).randn(grid.size)

    assert np.allclose(apply_parallel_operator(identity_map(grid), penalty,
                                               u), 0.)


def test_relax():
    assert relax(1., 3., 5., 1.) == pytest.approx(2.5)
    assert relax(np.ones(2), np.ones(2), np.ones(2), 10.) == \
        pytest.approx(np.ones(2))


def test_parallel_update_solves_implicit_step():
    """ Result satisfies u = u_half + dt P_par(u) up to the landing values
    which are taken from u_half.
    """
    parallel_map = reflection_map()
    penalty = ParallelPenalty(2., 1.5)
    u_half = np.random.RandomState(7).randn(parallel_map.grid.size)
    dt = 0.1

    u = parallel_update(u_half, parallel_map, penalty, dt)
    c = dt * penalty.strength
    mean = 0.5 * (parallel_map.P_f @ u_half + parallel_map.P_b @ u_half)
    assert np.allclose(u - u_half, -c * (u - mean))


def test_parallel_update_with_invalid_step(grid):
    with pytest.raises(ConfigError):
        parallel_update(np.zeros(grid.size), identity_map(grid),
                        ParallelPenalty(1.), 0.)


def test_parallel_update_is_contractive():
    """ The step never grows the l2 norm for a permutation map. """
    parallel_map = reflection_map()
    u = np.random.RandomState(8).randn(parallel_map.grid.size)

    for dt in (1e-4, 1., 1e3):
        v = parallel_update(u, parallel_map, ParallelPenalty(10.), dt)
        assert np.linalg.norm(v) <= np.linalg.norm(u) * (1 + 1e-12)


@pytest.mark.parametrize('reflect', [False, True])
def test_parallel_dissipation_check(reflect):
    grid = make_grid_2d(0., 1., 4, 0., 1., 7)
    parallel_map = reflection_map() if reflect else identity_map(grid)

    report = parallel_dissipation_check(parallel_map,
                                        ParallelPenalty.default(grid))
    assert report.passed, report
