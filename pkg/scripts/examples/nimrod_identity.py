#!/usr/bin/env python
# scripts/examples/nimrod_identity.py
import logging
from argparse import ArgumentParser

from anisodiff.utils import log_to_stream
from anisodiff.harness import ExperimentConfig
from anisodiff.harness.experiments import run_nimrod

# Add stream handler to logger 'anisodiff'.
log_to_stream(level=logging.INFO)

parser = ArgumentParser()
parser.add_argument('-o', '--order', type=int, default=2)
parser.add_argument('--out', default=None)

args = parser.parse_args()

config = ExperimentConfig('nimrod-identity', order=args.order,
                          resolutions=(17, 25, 33, 41), kappa_perp=(1e-3,),
                          output_dir=args.out)

for table in run_nimrod(config):
    for n, error in table.rows:
        print('{0:4d} {1:.6e}'.format(n, error))
    print('slope {0:.3f}'.format(table.slope))
