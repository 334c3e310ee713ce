"""
Command line interface
----------------------

.. code-block:: console

    $ anisodiff mms --order 4 --resolutions 21,41,61,81
    $ anisodiff nimrod --kappa-perp 1e-3,1e-6 --out results/
    $ anisodiff slab --config slab.ini --workers 8
    $ anisodiff trace --field slab --transits 200 --out results/

Flags override values of the ``[experiment]`` section of ``--config``, which
in turn override the experiment's defaults. Exit status is 0 on success, 2
for errors of the package, such as invalid settings or a field line leaving
the domain, and 1 for anything else.

"""
import sys
import logging
from argparse import ArgumentParser

from anisodiff import log
from anisodiff.utils import log_to_stream
from anisodiff.exceptions import AnisoDiffError
from anisodiff.harness import ExperimentConfig, EXPERIMENTS
from anisodiff.harness import experiments

RUNNERS = {
    'mms': experiments.run_mms,
    'nimrod': experiments.run_nimrod,
    'nimrod-identity': experiments.run_nimrod,
    'nimrod-limit': experiments.run_nimrod,
    'slab': experiments.run_slab,
    'trace': experiments.run_trace,
}


def create_parser():
    """ Return :class:`argparse.ArgumentParser` with one sub command per
    experiment.
    """
    parser = ArgumentParser(prog='anisodiff',
                            description='Field aligned anisotropic '
                                        'diffusion experiments.')
    subparsers = parser.add_subparsers(dest='experiment')

    for experiment in EXPERIMENTS:
        sub = subparsers.add_parser(experiment)
        sub.add_argument('--config', help='INI file with an [experiment] '
                                          'section.')
        sub.add_argument('--order', type=int, choices=(2, 4))
        sub.add_argument('--resolutions',
                         help='Comma separated points per direction.')
        sub.add_argument('--kappa-perp', dest='kappa_perp',
                         help='Comma separated perpendicular diffusivities.')
        sub.add_argument('--dt-coeff', dest='dt_coeff', type=float)
        sub.add_argument('--t-final', dest='t_final', type=float)
        sub.add_argument('--tol', type=float,
                         help='Field line integrator tolerance.')
        sub.add_argument('--out', dest='output_dir',
                         help='Directory for output files.')
        sub.add_argument('--workers', type=int,
                         help='Processes used for field line tracing.')
        sub.add_argument('--verbose', '-v', action='store_true')

        if experiment == 'trace':
            sub.add_argument('--transits', type=int)
            sub.add_argument('--field', choices=('slab', 'nimrod'))

    return parser


def load_config(args):
    """ Return :class:`ExperimentConfig` from parsed arguments. """
    overrides = dict((key, value) for key, value in vars(args).items()
                     if key not in ('experiment', 'config', 'verbose'))

    if args.config is not None:
        return ExperimentConfig.from_file(args.config, args.experiment,
                                          **overrides)

    return ExperimentConfig(args.experiment, **overrides)


def main(argv=None):
    """ Entry point of the ``anisodiff`` console script.

    :param argv: Arguments, default ``sys.argv[1:]``.
    :return: Exit status.
    """
    parser = create_parser()
    args = parser.parse_args(argv)
    if args.experiment is None:
        parser.print_help()
        return 2

    log_to_stream(level=logging.DEBUG if args.verbose else logging.INFO)

    try:
        config = load_config(args)
        RUNNERS[config.experiment](config)
    except AnisoDiffError as e:
        log.error(e)
        return 2
    except Exception:
        log.exception('{0} failed.'.format(args.experiment))
        return 1

    return 0


if __name__ == '__main__':
    sys.exit(main())
