import pytest
import numpy as np

from anisodiff.harness import (ExperimentConfig, ConvergenceTable, fit_slope,
                               EXPERIMENTS)
from anisodiff.exceptions import ConfigError


@pytest.mark.parametrize('experiment', EXPERIMENTS)
def test_defaults_are_valid(experiment):
    config = ExperimentConfig(experiment)

    assert config.experiment == experiment
    assert config.order == 2
    assert config.output_dir is None


def test_mms_defaults():
    config = ExperimentConfig('mms')

    assert config.resolutions == (21, 41, 61, 81)
    assert config.kappa_perp == (1., 1e-4, 1e-8, 1e-12)
    assert config.time_step(0.1) == pytest.approx(1e-4)


def test_fixed_time_step():
    config = ExperimentConfig('slab')
    assert config.time_step(0.01) == 1.


def test_values_from_strings():
    config = ExperimentConfig('nimrod', order='4', resolutions='9, 17',
                              kappa_perp='1e-3,1e-6', workers='2')

    assert config.order == 4
    assert config.resolutions == (9, 17)
    assert config.kappa_perp == (1e-3, 1e-6)
    assert config.workers == 2


def test_none_keeps_default():
    config = ExperimentConfig('mms', order=None, t_final=None)

    assert config.order == 2
    assert config.t_final == pytest.approx(0.1)


def test_unknown_experiment():
    with pytest.raises(ConfigError):
        ExperimentConfig('tokamak')


def test_unknown_setting():
    with pytest.raises(ConfigError):
        ExperimentConfig('mms', colour='blue')


def test_value_that_cannot_be_cast():
    with pytest.raises(ConfigError):
        ExperimentConfig('mms', order='four')


@pytest.mark.parametrize('experiment, values', [
    ('mms', dict(order=3)),
    ('mms', dict(resolutions=(17, 9))),
    ('mms', dict(resolutions=(9, 9))),
    ('mms', dict(resolutions=(3,))),
    ('mms', dict(order=4, resolutions=(7, 9))),
    ('mms', dict(kappa_perp=(0.,))),
    ('nimrod', dict(kappa_perp=(-1.,))),
    ('nimrod-limit', dict(kappa_perp=(1e-3,))),
    ('mms', dict(dt_coeff=-1.)),
    ('slab', dict(dt=0.)),
    ('mms', dict(t_final=0.)),
    ('mms', dict(tol=0.)),
    ('mms', dict(cg_rtol=-1e-10)),
    ('slab', dict(kappa_par=-1.)),
    ('slab', dict(steady_tol=-1.)),
    ('trace', dict(transits=0)),
    ('trace', dict(field='tokamak')),
    ('slab', dict(workers=0)),
])
def test_invalid_settings(experiment, values):
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment, **values)


def test_items():
    items = ExperimentConfig('mms').items()

    assert items[0] == ('experiment', 'mms')
    assert ('order', 2) in items
    assert [key for key, _ in items[1:]] == sorted(key for key, _ in
                                                  items[1:])


@pytest.fixture
def ini_file(tmpdir):
    path = tmpdir.join('experiment.ini')
    path.write('[experiment]\n'
               'experiment = nimrod\n'
               'resolutions = 9 17\n'
               'kappa-perp = 1e-3\n'
               't_final = 0.01\n')
    return str(path)


def test_from_file(ini_file):
    config = ExperimentConfig.from_file(ini_file)

    assert config.experiment == 'nimrod'
    assert config.resolutions == (9, 17)
    assert config.kappa_perp == (1e-3,)
    assert config.t_final == pytest.approx(0.01)


def test_from_file_with_overrides(ini_file):
    config = ExperimentConfig.from_file(ini_file, 'nimrod-identity', order=4,
                                        t_final=None)

    assert config.experiment == 'nimrod-identity'
    assert config.order == 4
    assert config.t_final == pytest.approx(0.01)


def test_from_missing_file(tmpdir):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(str(tmpdir.join('missing.ini')))


def test_from_file_without_section(tmpdir):
    path = tmpdir.join('other.ini')
    path.write('[other]\norder = 2\n')

    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(str(path))


def test_fit_slope():
    n = np.array([10, 20, 40, 80])
    table = ConvergenceTable(1., zip(n, 3. * n ** -2.))

    assert fit_slope(table) == pytest.approx(2.)
    assert table.slope == pytest.approx(2.)


@pytest.mark.parametrize('rows', [
    [(10, 1e-3)],
    [(10, 1e-3), (20, 0.)],
    [(10, 1e-3), (20, np.nan)],
])
def test_fit_slope_with_invalid_rows(rows):
    with pytest.raises(ConfigError):
        fit_slope(ConvergenceTable(1., rows))
