"""The two reference models used throughout the tests and fixtures.

* ``example1_model`` -- 4-state continuous model with two noise inputs
  observed through ten outputs (``H[k, j] = |k - j| + 1``).
* ``example2_fine`` / ``example2_coarse`` -- the same dynamics sampled with
  period 0.5 and then observed only every fifth step.
"""

import numpy as np

from .matfun import expm
from .model import CtModel, DtModel

EXAMPLE2_FINE_STEP = 0.5
EXAMPLE2_FACTOR = 5


def example1_matrices():
    F = np.array([
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-2.0, -5.0, -6.0, -4.0],
    ])
    G = np.array([
        [1.0, -1.0],
        [1.0, -1.0],
        [1.0, -1.0],
        [1.0, 1.0],
    ])
    H = np.array([[abs(k - j) + 1.0 for j in range(1, 5)] for k in range(1, 11)])
    return F, G, H


def example1_model():
    return CtModel(*example1_matrices())


def example2_fine():
    F, G, H = example1_matrices()
    return DtModel.fine(expm(F, EXAMPLE2_FINE_STEP), G, H, step=EXAMPLE2_FINE_STEP)


def example2_coarse():
    # local import keeps this module importable from resample's dependencies
    from .resample import subsample

    return subsample(example2_fine(), EXAMPLE2_FACTOR)
