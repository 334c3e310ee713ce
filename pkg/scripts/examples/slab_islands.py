#!/usr/bin/env python
# scripts/examples/slab_islands.py
import logging
from argparse import ArgumentParser

from anisodiff.utils import log_to_stream
from anisodiff.harness import ExperimentConfig
from anisodiff.harness.experiments import (run_slab, contour_band,
                                           profile_flattening, SLAB_O_POINTS)

log_to_stream(level=logging.INFO)

parser = ArgumentParser()
parser.add_argument('-n', type=int, default=61)
parser.add_argument('--t-final', type=float, default=4000.)
parser.add_argument('--workers', type=int, default=None)
parser.add_argument('--out', default='slab')

args = parser.parse_args()

config = ExperimentConfig('slab', resolutions=(args.n,),
                          t_final=args.t_final, workers=args.workers,
                          output_dir=args.out)
result = run_slab(config)

print('smallest profile slope in [0.45, 0.7]: {0:.3f}'.format(
    profile_flattening(result)))
for point in SLAB_O_POINTS:
    level = result.value_at(point)
    print('contour through O-point {0}: psi in [{1:.3f}, {2:.3f}]'.format(
        point, *contour_band(result, level)))
