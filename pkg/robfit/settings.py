#  Copyright (c) 2021 robfit

import numpy as np
from dotmap import DotMap

from .util.execution import RunManager

run = RunManager()


def set_seed(seed):
    """Set random seed for numpy.

    Library functions that draw random numbers take an explicit seed or `numpy.random.Generator`; this only
    affects code relying on the legacy global state (e.g. tests).
    """
    np.random.seed(seed)


_verbosity = 0


def set_verbosity(verbosity):
    global _verbosity
    _verbosity = verbosity


def get_verbosity():
    return _verbosity


options = DotMap({'branch_epsilon': 1e-5,  # |alpha| or |alpha - 2| below this uses the limit branches
                  'quadrature_intervals': 2 ** 14,
                  'grid_decimals': 12,
                  'grid_tol': 1e-9,
                  'subsample_cap': 200_000,
                  'degenerate_mad_factor': 1e-6,
                  'min_depth': 1e-6,
                  })
