#!/usr/bin/env python
"""
anisodiff solves strongly anisotropic diffusion in magnetised plasmas with
summation-by-parts finite differences for the perpendicular part and a field
line map for the parallel part.

"""
import os
from setuptools import setup

cwd = os.path.dirname(os.path.abspath(__name__))

long_description = open(os.path.join(cwd, 'README.rst'), 'r').read()

setup(name='anisodiff',
      version='0.1.0',
      author='anisodiff contributors',
      description='Field aligned anisotropic diffusion with SBP-SAT '
                  'operators.',
      long_description=long_description,
      license='MPL',
      packages=[
          'anisodiff',
          'anisodiff.harness',
      ],
      install_requires=[
          'numpy>=1.17',
          'scipy>=1.4',
          'sympy>=1.5',
          'scikit-image>=0.16',
      ],
      entry_points={
          'console_scripts': [
              'anisodiff=anisodiff.harness.cli:main',
          ],
      },
      classifiers=[
          'Development Status :: 3 - Alpha',
          'Intended Audience :: Science/Research',
          'License :: OSI Approved :: Mozilla Public License 2.0 (MPL 2.0)',
          'Operating System :: OS Independent',
          'Programming Language :: Python :: 3.6',
          'Programming Language :: Python :: 3.7',
          'Programming Language :: Python :: 3.8',
          'Topic :: Scientific/Engineering :: Physics',
      ])
