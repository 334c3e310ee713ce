import pickle

import pytest
import numpy as np

from anisodiff import conf
from anisodiff.grid import make_grid_2d
from anisodiff.fieldline import (UniformField, zero_field, nimrod_field,
                                 slab_field, trace, field_line,
                                 poincare_section, build_parallel_map,
                                 default_span, landing_margins,
                                 _landing_points, CONVERGED, LEFT_DOMAIN,
                                 NIMROD_DOMAIN, SLAB_DOMAIN)
from anisodiff.parallel import apply_parallel_operator, ParallelPenalty
from anisodiff.exceptions import LeftDomainError, ConfigError

UNIT_SQUARE = ((0., 1.), (0., 1.))


@pytest.fixture(autouse=True)
def clear_map_cache():
    """ Every test traces its own maps. """
    _landing_points.cache.clear()


def test_uniform_field_trace():
    """ Lines of a uniform field are straight. """
    field = UniformField(0.1, -0.05, UNIT_SQUARE)
    result = trace(field, (0.4, 0.5), span=1.)

    assert result.status == CONVERGED
    assert result.converged
    assert np.allclose(result.x_plus, [0.5, 0.45])
    assert np.allclose(result.x_minus, [0.3, 0.55])
    assert result.steps > 0


def test_trace_leaves_domain():
    """ A line crossing a non-periodic boundary stops there. """
    field = UniformField(1., 0., UNIT_SQUARE)
    result = trace(field, (0.5, 0.5), span=1.)

    assert result.status == LEFT_DOMAIN
    assert not result.converged
    assert result.x_plus[0] == pytest.approx(1., abs=1e-6)


def test_landing_margins():
    """ Margins follow the integration tolerance unless that is tighter than
    conf.BOUNDARY_TOL.
    """
    assert np.allclose(landing_margins(NIMROD_DOMAIN, 1e-6, 1e-6),
                       [1e-5, 1e-5])
    assert np.allclose(landing_margins(SLAB_DOMAIN, 1e-8, 1e-9),
                       [1e-8, 10 * np.pi * 1e-8])
    assert np.allclose(landing_margins(UNIT_SQUARE, 1e-14, 1e-14),
                       [1e-9, 1e-9])


@pytest.mark.parametrize('corner', [(-0.5, -0.5), (0.5, -0.5), (-0.5, 0.5),
                                    (0.5, 0.5)])
def test_nimrod_corner_stays_in_domain(corner):
    """ Corners are X-points of the separatrix psi = 0. Integration error
    pushes the line past the wall, the landing points are clamped back.
    """
    result = trace(nimrod_field(), corner)

    assert result.converged
    for point in (result.x_plus, result.x_minus):
        assert np.all(np.abs(point) <= 0.5)


def test_nimrod_map_builds_on_17_grid():
    """ Every node of the 17 x 17 grid, walls included, lands in the
    domain.
    """
    grid = make_grid_2d(-0.5, 0.5, 17, -0.5, 0.5, 17)
    parallel_map = build_parallel_map(grid, nimrod_field())

    assert parallel_map.audit_weights() == []
    assert np.allclose(parallel_map.P_f @ np.ones(grid.size), 1.)


def test_trace_wraps_periodic_coordinate():
    field = UniformField(0., 1., UNIT_SQUARE, periodic_y=True)
    result = trace(field, (0.5, 0.5), span=0.75)

    assert result.converged
    assert np.allclose(result.x_plus, [0.5, 0.25])
    assert np.allclose(result.x_minus, [0.5, 0.75])


@pytest.mark.parametrize('span, rtol', [(0., None), (-1., None), (1., 0.)])
def test_trace_with_invalid_arguments(span, rtol):
    with pytest.raises(ConfigError):
        trace(zero_field(), (0., 0.), span=span, rtol=rtol)


def test_nimrod_lines_follow_flux_contours():
    """ In-plane lines keep psi constant and stay inside the domain. """
    field = nimrod_field()
    for start in [(0.1, 0.), (0.3, -0.2), (0.5, 0.1), (-0.45, -0.45)]:
        result = trace(field, start, rtol=1e-8, atol=1e-8)
        assert result.converged

        for end in (result.x_plus, result.x_minus):
            assert field.flux(*end) == pytest.approx(field.flux(*start),
                                                     abs=1e-6)


def test_nimrod_field_is_tangent_to_boundary():
    b_x, b_y = nimrod_field().evaluate(0.5, 0.2, 0.)
    assert b_x == pytest.approx(0., abs=1e-12)
    assert b_y != 0.


def test_unperturbed_slab_field():
    """ Without perturbation psi is constant and theta advances by
    2 pi psi per transit.
    """
    field = slab_field(epsilons=())
    result = trace(field, (0.3, 0.))

    assert default_span(field) == pytest.approx(2 * np.pi)
    assert np.allclose(result.x_plus, [0.3, 0.6 * np.pi], atol=1e-5)
    assert np.allclose(result.x_minus, [0.3, -0.6 * np.pi], atol=1e-5)


def test_field_equality_and_pickling():
    """ Fields pickle for process pools and compare by definition. """
    field = slab_field()
    copy = pickle.loads(pickle.dumps(field))

    assert copy == field
    assert hash(copy) == hash(field)
    assert copy != slab_field(epsilons=())
    assert np.allclose(copy.evaluate(0.4, 1., 2.), field.evaluate(0.4, 1., 2.))


def test_field_line():
    field = UniformField(1., 0.)
    points = field_line(field, (0., 0.), span=2., samples=5)

    assert points.shape == (5, 2)
    assert np.allclose(points[:, 0], [0., 0.5, 1., 1.5, 2.])


def test_poincare_section_of_unperturbed_slab():
    field = slab_field(epsilons=())
    sections = poincare_section(field, [(0.25, 0.1), (0.5, 1.)], 4)

    assert [s.shape for s in sections] == [(4, 2), (4, 2)]
    assert np.allclose(sections[0][:, 0], 0.25, atol=1e-8)
    # theta advances by pi / 2 per transit.
    assert np.allclose(sections[0][:, 1] - 0.1,
                       [np.pi / 2, -np.pi, -np.pi / 2, 0.],
                       atol=1e-4)
    assert np.all(sections[1][:, 1] >= -np.pi)
    assert np.all(sections[1][:, 1] < np.pi)


def test_island_confines_nearby_line():
    """ A line started next to the O-point of the 2/1 island stays inside
    the island.
    """
    sections = poincare_section(slab_field(), [(0.51, 0.)], 100)
    assert np.all(np.abs(sections[0][:, 0] - 0.5) < 0.04)


def test_separatrix_line_spreads_beyond_island_core():
    """ Over 500 transits a line started at the X-point of the 2/1 island
    covers a wider psi range than a line next to its O-point.
    """
    core, separatrix = poincare_section(
        slab_field(), [(0.51, 0.), (0.5, np.pi / 2)], 500)

    assert np.ptp(separatrix[:, 0]) > np.ptp(core[:, 0])
    assert np.all(np.abs(separatrix[:, 0] - 0.5) < 0.1)


def test_slab_trace_is_reversible():
    """ Tracing back from the forward landing point of one transit returns
    to the start.
    """
    field = slab_field()
    start = (0.25, 0.)
    forward = trace(field, start)
    back = trace(field, forward.x_plus)

    assert forward.converged and back.converged
    assert np.allclose(back.x_minus, start, atol=1e-4)


def test_poincare_section_with_invalid_arguments():
    with pytest.raises(ConfigError):
        poincare_section(nimrod_field(), [(0., 0.)], 3)

    with pytest.raises(ConfigError):
        poincare_section(slab_field(), [(0.5, 0.)], 0)


def test_stationary_field_gives_identity_map():
    grid = make_grid_2d(0., 1., 5, 0., 1., 6)
    parallel_map = build_parallel_map(grid, zero_field(UNIT_SQUARE), span=1.)
    u = np.random.RandomState(0).randn(grid.size)

    assert np.allclose(parallel_map.P_f @ u, u)
    assert np.allclose(parallel_map.P_b @ u, u)


def test_grid_aligned_map():
    """ A field along y with span L_y returns every line to its node. """
    grid = make_grid_2d(0., 1., 6, 0., 1., 6)
    field = UniformField(0., 1., UNIT_SQUARE, periodic_y=True)
    parallel_map = build_parallel_map(grid, field, span=1., rtol=1e-10,
                                      atol=1e-10)

    assert parallel_map.periodic_y
    assert not parallel_map.audit_weights()
    u = grid.sample(lambda x, y: np.sin(2 * np.pi * y) + x)
    assert np.allclose(parallel_map.P_f @ u, u, atol=1e-8)
    assert np.allclose(parallel_map.P_b @ u, u, atol=1e-8)


def test_build_parallel_map_raises_for_leaving_line():
    grid = make_grid_2d(0., 1., 4, 0., 1., 4)
    field = UniformField(1., 0., UNIT_SQUARE)

    with pytest.raises(LeftDomainError) as e:
        build_parallel_map(grid, field, span=0.5)

    assert e.value.node is not None


def test_map_cache_is_bounded(monkeypatch):
    monkeypatch.setattr(conf, 'MAP_CACHE_SIZE', 1)
    field = zero_field(UNIT_SQUARE)

    for n in (4, 5):
        build_parallel_map(make_grid_2d(0., 1., n, 0., 1., n), field,
                           span=1.)

    assert len(_landing_points.cache) == 1


def test_build_parallel_map_is_cached():
    grid = make_grid_2d(-0.5, 0.5, 5, -0.5, 0.5, 5)
    first = build_parallel_map(grid, nimrod_field())
    second = build_parallel_map(grid, nimrod_field())

    assert len(_landing_points.cache) == 1
    assert np.array_equal(first.forward[1], second.forward[1])


def test_parallel_tracing_matches_serial():
    """ A process pool gives the same landing points. """
    grid = make_grid_2d(0., 1., 5, -np.pi, np.pi, 5)
    field = slab_field()
    serial = build_parallel_map(grid, field)
    pooled = build_parallel_map(grid, field, workers=2)

    assert np.array_equal(serial.forward[0], pooled.forward[0])
    assert np.allclose(serial.forward[1], pooled.forward[1])
    assert np.allclose(serial.backward[1], pooled.backward[1])


def test_slab_map_is_valid():
    (x_left, x_right), (y_left, y_right) = SLAB_DOMAIN
    grid = make_grid_2d(x_left, x_right, 8, y_left, y_right, 8)
    parallel_map = build_parallel_map(grid, slab_field())

    assert not parallel_map.audit_weights()


def test_parallel_operator_on_traced_nimrod_map():
    """ Bilinear fields are interpolated exactly, so the operator equals
    the field evaluated at the traced landing points.
    """
    (x_left, x_right), (y_left, y_right) = NIMROD_DOMAIN
    grid = make_grid_2d(x_left, x_right, 8, y_left, y_right, 8)
    field = nimrod_field()
    parallel_map = build_parallel_map(grid, field)
    penalty = ParallelPenalty(3., 0.5)

    def bilinear(x, y):
        return 1 + 2 * x - 3 * y + 4 * x * y

    u = grid.sample(bilinear)
    X, Y = grid.mesh()
    expected = []
    for point, value in zip(zip(X.ravel(), Y.ravel()), u):
        result = trace(field, point)
        mean = 0.5 * (bilinear(*result.x_plus) + bilinear(*result.x_minus))
        expected.append(-1.5 * (value - mean))

    assert np.allclose(apply_parallel_operator(parallel_map, penalty, u),
                       expected, atol=1e-12)
