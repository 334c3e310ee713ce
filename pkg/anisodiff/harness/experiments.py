"""
Experiments
-----------

Every experiment takes an :class:`anisodiff.harness.ExperimentConfig`,
which is validated before anything is computed, and writes its results to
``config.output_dir`` when that is set.

"""
import numpy as np
from skimage.measure import find_contours

from anisodiff import log, conf
from anisodiff.grid import l2_norm
from anisodiff.parallel import bilinear_stencil
from anisodiff.fieldline import (poincare_section, slab_field, nimrod_field,
                                 SLAB_MODES)
from anisodiff.solver import run, write_diagnostics
from anisodiff.exceptions import ConfigError
from anisodiff.harness import ConvergenceTable
from anisodiff.harness import problems
from anisodiff.harness.output import (write_table, write_field,
                                      write_contours, write_poincare,
                                      write_profile, output_path)

SLAB_O_POINTS = ((0.495, -np.pi), (0.675, 0.))
SLAB_SEEDS = tuple((p, 0.) for p in np.linspace(0.05, 0.95, 19)) + \
    tuple((p, np.pi / 2) for p in (0.5, 0.667))


def relative_error(u, exact, grid):
    """ Return ``||u - exact||_l2 / ||exact||_l2``. """
    return l2_norm(u - exact, grid) / l2_norm(exact, grid)


class _cg_tolerance(object):
    """ Context manager which sets ``conf.CG_RTOL`` temporarily. """

    def __init__(self, rtol):
        self.rtol = rtol

    def __enter__(self):
        self.previous = conf.CG_RTOL
        conf.CG_RTOL = self.rtol

    def __exit__(self, *exc_info):
        conf.CG_RTOL = self.previous


def _check(config, *experiments):
    if config.experiment not in experiments:
        raise ConfigError('Expected experiment {0}, got {1!r}.'.format(
            ' or '.join(experiments), config.experiment))


def _finish(config, tables, name):
    for table in tables:
        if len(table.rows) > 1:
            log.info('kappa_perp = {0:.1e}: slope {1:.3f}'.format(
                table.kappa_perp, table.slope))

    if config.output_dir is not None:
        write_table(tables, output_path(config.output_dir, name),
                    config.items())

    return tables


def run_mms(config):
    """ Run manufactured solution convergence study.

    :return: List with one :class:`ConvergenceTable` per ``kappa_perp``.
    """
    _check(config, 'mms')
    expression = problems.manufactured_solution()

    tables = []
    with _cg_tolerance(config.cg_rtol):
        for kappa_perp in config.kappa_perp:
            table = ConvergenceTable(kappa_perp)
            for n in config.resolutions:
                problem, exact = problems.mms_problem(n, config.order,
                                                      kappa_perp, expression)
                grid = problem.grid
                state = run(problem, config.time_step(grid.gx.dx),
                            config.t_final)
                expected = grid.sample(
                    lambda x, y: exact(x, y, config.t_final))
                table.add(n, relative_error(state.u, expected, grid))
                log.info('mms n = {0}: error {1:.6e}'.format(
                    n, table.rows[-1][1]))
            tables.append(table)

    return _finish(config, tables, 'mms_order{0}.tsv'.format(config.order))


def run_nimrod(config):
    """ Run NIMROD convergence study. 'nimrod' uses traced field lines,
    'nimrod-identity' the identity map and 'nimrod-limit' traced lines with
    ``kappa_perp = 0``.

    :return: List with one :class:`ConvergenceTable` per ``kappa_perp``.
    """
    _check(config, 'nimrod', 'nimrod-identity', 'nimrod-limit')
    identity = config.experiment == 'nimrod-identity'

    tables = []
    with _cg_tolerance(config.cg_rtol):
        for kappa_perp in config.kappa_perp:
            table = ConvergenceTable(kappa_perp)
            for n in config.resolutions:
                problem, exact = problems.nimrod_problem(
                    n, config.order, kappa_perp, identity=identity,
                    kappa_par=config.kappa_par, rtol=config.tol,
                    atol=config.tol, workers=config.workers)
                grid = problem.grid
                state = run(problem, config.time_step(grid.gx.dx),
                            config.t_final)
                expected = grid.sample(
                    lambda x, y: exact(x, y, config.t_final))
                table.add(n, relative_error(state.u, expected, grid))
                log.info('{0} n = {1}: error {2:.6e}'.format(
                    config.experiment, n, table.rows[-1][1]))
            tables.append(table)

    return _finish(config, tables, '{0}_order{1}.tsv'.format(
        config.experiment, config.order))


class SlabResult(object):
    """ Outcome of :func:`run_slab`.

    :ivar grid: Grid of the run.
    :ivar u: Final temperature.
    :ivar t: Final time.
    :ivar steps: Number of steps.
    :ivar steady: True when the run stopped at quasi-steady state.
    :ivar contours: List of ``(level, polylines)``.
    :ivar sections: Poincare section per seed, None when not computed.
    """

    def __init__(self, grid, state, steady):
        self.grid = grid
        self.state = state
        self.u = state.u
        self.t = state.t
        self.steps = state.step
        self.steady = steady
        self.contours = []
        self.sections = None

    def value_at(self, point):
        """ Return bilinear interpolation of the temperature at `point`. """
        corners, weights = bilinear_stencil(self.grid, [point],
                                            periodic_y=True)
        return float(np.dot(weights[0], self.u[corners[0]]))

    def profile(self, theta=0.):
        """ Return ``(psi, T(psi, theta))`` along the grid line closest to
        `theta`.
        """
        j = int(np.argmin(np.abs(self.grid.y - theta)))
        return self.grid.x, self.grid.as_array(self.u)[:, j]


def contour_lines(result, level):
    """ Return polylines of ``T = level`` in physical coordinates. """
    grid = result.grid
    lines = find_contours(grid.as_array(result.u), level)
    return [np.column_stack([grid.gx.x_left + line[:, 0] * grid.gx.dx,
                             grid.gy.x_left + line[:, 1] * grid.gy.dx])
            for line in lines]


def contour_band(result, level):
    """ Return ``(psi_min, psi_max)`` of the contour ``T = level``. """
    lines = contour_lines(result, level)
    if not lines:
        raise ConfigError('No contour at level {0}.'.format(level))

    psi = np.concatenate([line[:, 0] for line in lines])
    return float(psi.min()), float(psi.max())


def profile_flattening(result, psi_band=(0.45, 0.7), theta=0.):
    """ Return smallest slope ``dT/dpsi`` of the profile at `theta` over
    `psi_band`.
    """
    psi, T = result.profile(theta)
    slope = np.gradient(T, psi)
    inside = (psi >= psi_band[0]) & (psi <= psi_band[1])
    return float(slope[inside].min())


def slab_levels(result, spacing=0.05):
    """ Return contour levels every `spacing` plus the values at the island
    O-points.
    """
    levels = list(spacing * np.arange(1, int(round(1. / spacing))))
    levels.extend(result.value_at(point) for point in SLAB_O_POINTS)
    return levels


def run_slab(config, epsilons=SLAB_MODES, sections=True):
    """ Run slab temperature problem until quasi-steady state or
    ``config.t_final``.

    :param config: :class:`anisodiff.harness.ExperimentConfig`.
    :param epsilons: Perturbation modes of the slab field.
    :param sections: Compute a Poincare section for overlays.
    :return: :class:`SlabResult`.
    """
    _check(config, 'slab')
    n = config.resolutions[-1]
    kappa_perp = config.kappa_perp[0]
    problem = problems.slab_problem(n, config.order, kappa_perp,
                                    config.kappa_par, epsilons,
                                    rtol=config.tol, atol=config.tol,
                                    workers=config.workers)
    grid = problem.grid

    previous = {}

    def steady(state):
        u_old = previous.get('u')
        previous['u'] = state.u
        if u_old is None or config.steady_tol == 0:
            return False
        change = l2_norm(state.u - u_old, grid) / l2_norm(state.u, grid)
        return change < config.steady_tol

    with _cg_tolerance(config.cg_rtol):
        state = run(problem, config.time_step(grid.gx.dx), config.t_final,
                    callback=steady)

    result = SlabResult(grid, state, steady=state.t < config.t_final)
    if not result.steady and config.steady_tol > 0:
        log.warning('Slab run reached t = {0} before quasi-steady state.'
                    .format(state.t))

    result.contours = [(level, contour_lines(result, level))
                       for level in slab_levels(result)]
    if sections:
        result.sections = poincare_section(slab_field(epsilons), SLAB_SEEDS,
                                           config.transits, config.tol,
                                           config.tol)

    if config.output_dir is not None:
        directory, header = config.output_dir, config.items()
        write_field(result.u, grid, output_path(directory, 'slab_field.tsv'),
                    header)
        psi, values = result.profile()
        write_profile(psi, values,
                      output_path(directory, 'slab_profile.tsv'), header)
        write_contours(result.contours,
                       output_path(directory, 'slab_contours.tsv'), header)
        write_diagnostics(state, output_path(directory,
                                             'slab_diagnostics.tsv'))
        if result.sections is not None:
            write_poincare(result.sections,
                           output_path(directory, 'slab_poincare.tsv'),
                           header)

    return result


def run_trace(config, seeds=SLAB_SEEDS):
    """ Compute Poincare section of the slab field. With ``field = 'nimrod'``
    the in-plane NIMROD lines are sampled once per ``2 pi`` instead.

    :return: List with one array of shape ``(transits, 2)`` per seed.
    """
    _check(config, 'trace')
    if config.field == 'nimrod':
        field = nimrod_field()
        field.period = 2 * np.pi
        seeds = [(p, 0.) for p in np.linspace(0.05, 0.45, 9)]
    else:
        field = slab_field()

    sections = poincare_section(field, seeds, config.transits, config.tol,
                                config.tol)

    if config.output_dir is not None:
        write_poincare(sections, output_path(config.output_dir,
                                             '{0}_poincare.tsv'
                                             .format(config.field)),
                       config.items())

    return sections
