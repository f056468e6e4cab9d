#  Copyright (c) 2021 robfit

from . import bundle, cloud, geometry, line, outliers, registration, sweep, synthetic
