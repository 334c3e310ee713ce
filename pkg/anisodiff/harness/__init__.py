"""
Experiment harness
------------------

Convergence studies and the slab temperature run, driven by an
:class:`ExperimentConfig` and reported as :class:`ConvergenceTable` objects
and tab separated files.

"""
from configparser import ConfigParser

import numpy as np

from anisodiff.sbp import MIN_POINTS
from anisodiff.exceptions import ConfigError

EXPERIMENTS = ('mms', 'nimrod', 'nimrod-identity', 'nimrod-limit', 'slab',
               'trace')

NIMROD_RESOLUTIONS = (17, 25, 33, 41, 49, 57)

DEFAULTS = {
    'mms': dict(resolutions=(21, 41, 61, 81),
                kappa_perp=(1., 1e-4, 1e-8, 1e-12),
                dt_coeff=1e-2, t_final=0.1),
    'nimrod': dict(resolutions=NIMROD_RESOLUTIONS,
                   kappa_perp=(1., 1e-3, 1e-6, 1e-9), dt_coeff=0.1,
                   t_final=1 / (2 * np.pi ** 2)),
    'nimrod-identity': dict(resolutions=NIMROD_RESOLUTIONS,
                            kappa_perp=(1., 1e-3, 1e-6), dt_coeff=0.1,
                            t_final=1 / (2 * np.pi ** 2)),
    'nimrod-limit': dict(resolutions=NIMROD_RESOLUTIONS, kappa_perp=(0.,),
                         dt_coeff=0.1, t_final=1 / (2 * np.pi ** 2)),
    'slab': dict(resolutions=(101,), kappa_perp=(1e-6,), dt=1.,
                 t_final=1e4),
    'trace': dict(resolutions=(), kappa_perp=(), t_final=0.),
}

COMMON = dict(order=2, dt_coeff=None, dt=None, tol=1e-6, cg_rtol=1e-13,
              kappa_par=1., steady_tol=1e-6, transits=500, field='slab',
              output_dir=None, workers=None)


def _floats(value):
    if isinstance(value, str):
        value = value.replace(',', ' ').split()
    return tuple(float(v) for v in np.atleast_1d(value))


def _ints(value):
    return tuple(int(v) for v in _floats(value))


def _optional(cast):
    def convert(value):
        if value is None or value in ('', 'none', 'None'):
            return None
        return cast(value)
    return convert


CONVERTERS = {
    'order': int,
    'resolutions': _ints,
    'kappa_perp': _floats,
    'dt_coeff': _optional(float),
    'dt': _optional(float),
    't_final': float,
    'tol': float,
    'cg_rtol': float,
    'kappa_par': float,
    'steady_tol': float,
    'transits': int,
    'field': str,
    'output_dir': _optional(str),
    'workers': _optional(int),
}


class ExperimentConfig(object):
    """ Settings of one experiment.

    Values are taken from the experiment's defaults, then from `values`.
    Everything is validated on construction.

    :ivar experiment: One of 'mms', 'nimrod', 'nimrod-identity',
        'nimrod-limit', 'slab' or 'trace'.
    :ivar order: Accuracy order, 2 or 4.
    :ivar resolutions: Strictly increasing numbers of points per direction.
    :ivar kappa_perp: Tuple with perpendicular diffusivities.
    :ivar dt_coeff: Coefficient ``c`` in ``dt = c dx^2``.
    :ivar dt: Fixed time step, overrides `dt_coeff`.
    :ivar t_final: End time.
    :ivar tol: Relative and absolute field line tolerance.
    :ivar cg_rtol: CG tolerance.
    :ivar kappa_par: Parallel diffusivity.
    :ivar steady_tol: Slab run stops when a step changes the solution less
        than this, in relative l2 norm. Zero disables the check.
    :ivar transits: Transits of Poincare sections.
    :ivar field: Field traced by 'trace', 'slab' or 'nimrod'.
    :ivar output_dir: Directory for output files, None writes nothing.
    :ivar workers: Processes used for field line tracing.
    """

    def __init__(self, experiment, **values):
        if experiment not in EXPERIMENTS:
            raise ConfigError('Unknown experiment {0!r}.'.format(experiment))

        settings = dict(COMMON)
        settings.update(DEFAULTS[experiment])
        for key, value in values.items():
            if key not in CONVERTERS:
                raise ConfigError('Unknown setting {0!r}.'.format(key))
            if value is not None:
                settings[key] = value

        self.experiment = experiment
        for key, value in settings.items():
            try:
                setattr(self, key, CONVERTERS[key](value))
            except (TypeError, ValueError):
                raise ConfigError('Invalid value {0!r} for {1}.'.format(value,
                                                                        key))

        self.validate()

    @classmethod
    def from_file(cls, path, experiment=None, **overrides):
        """ Read settings from the ``[experiment]`` section of an INI file.
        Keyword arguments that are not None override file values.
        """
        parser = ConfigParser()
        if not parser.read(path):
            raise ConfigError('Cannot read {0}.'.format(path))

        if not parser.has_section('experiment'):
            raise ConfigError('{0} has no [experiment] section.'.format(path))

        values = dict(parser.items('experiment'))
        experiment = experiment or values.pop('experiment', None)
        values.pop('experiment', None)
        values = dict((k.replace('-', '_'), v) for k, v in values.items())
        values.update((k, v) for k, v in overrides.items() if v is not None)

        return cls(experiment, **values)

    def validate(self):
        """ Raise :class:`ConfigError` for inconsistent settings. """
        if self.order not in MIN_POINTS:
            raise ConfigError('Order must be 2 or 4, got {0}.'
                              .format(self.order))

        if self.experiment != 'trace':
            if not self.resolutions:
                raise ConfigError('Need at least one resolution.')

            if any(b <= a for a, b in zip(self.resolutions,
                                          self.resolutions[1:])):
                raise ConfigError('Resolutions {0} are not strictly '
                                  'increasing.'.format(self.resolutions))

            if self.resolutions[0] < MIN_POINTS[self.order]:
                raise ConfigError('Order {0} needs at least {1} points.'
                                  .format(self.order, MIN_POINTS[self.order]))

            if not self.kappa_perp:
                raise ConfigError('Need at least one kappa_perp.')

        if any(k < 0 for k in self.kappa_perp):
            raise ConfigError('kappa_perp must be non-negative.')

        if self.experiment in ('mms', 'nimrod', 'nimrod-identity') and \
                not all(k > 0 for k in self.kappa_perp):
            raise ConfigError('{0} needs positive kappa_perp.'
                              .format(self.experiment))

        if self.experiment == 'nimrod-limit' and \
                any(k != 0 for k in self.kappa_perp):
            raise ConfigError('nimrod-limit runs with kappa_perp = 0.')

        if self.dt is None and self.experiment not in ('trace',):
            if self.dt_coeff is None or not self.dt_coeff > 0:
                raise ConfigError('dt_coeff must be positive.')

        if self.dt is not None and not self.dt > 0:
            raise ConfigError('dt must be positive.')

        if self.experiment != 'trace' and not self.t_final > 0:
            raise ConfigError('t_final must be positive.')

        for key in ('tol', 'cg_rtol'):
            if not getattr(self, key) > 0:
                raise ConfigError('{0} must be positive.'.format(key))

        if self.kappa_par < 0 or self.steady_tol < 0:
            raise ConfigError('kappa_par and steady_tol must be '
                              'non-negative.')

        if self.transits < 1:
            raise ConfigError('Need at least one transit.')

        if self.field not in ('slab', 'nimrod'):
            raise ConfigError('Unknown field {0!r}.'.format(self.field))

        if self.workers is not None and self.workers < 1:
            raise ConfigError('workers must be at least 1.')

    def time_step(self, dx):
        """ Return ``dt`` or ``dt_coeff * dx^2``. """
        if self.dt is not None:
            return self.dt

        return self.dt_coeff * dx ** 2

    def items(self):
        """ Return sorted ``(key, value)`` pairs, as written into output
        headers.
        """
        keys = ['experiment'] + sorted(CONVERTERS)
        return [(key, getattr(self, key)) for key in keys]


class ConvergenceTable(object):
    """ Errors per resolution of one configuration.

    :ivar rows: List with ``(n, error)``.
    :ivar kappa_perp: Perpendicular diffusivity of the rows.
    """

    def __init__(self, kappa_perp, rows=None):
        self.kappa_perp = kappa_perp
        self.rows = list(rows or [])

    def add(self, n, error):
        self.rows.append((int(n), float(error)))

    @property
    def slope(self):
        return fit_slope(self)

    def __repr__(self):
        return 'ConvergenceTable(kappa_perp={0}, rows={1})'.format(
            self.kappa_perp, self.rows)


def fit_slope(table):
    """ Return negated least squares slope of ``log(error)`` against
    ``log(n)``, positive for converging errors.

    :param table: :class:`ConvergenceTable`.
    :raises ConfigError: With fewer than 2 rows or non-positive errors.
    """
    if len(table.rows) < 2:
        raise ConfigError('Need at least 2 rows to fit a slope, got {0}.'
                          .format(len(table.rows)))

    n, error = np.array(table.rows, dtype=float).T
    if np.any(error <= 0) or not np.all(np.isfinite(error)):
        raise ConfigError('Errors must be positive and finite.')

    return -float(np.polyfit(np.log(n), np.log(error), 1)[0])
