#  Copyright (c) 2021 robfit

from . import adaptive, interfaces, kernel, partition, problem
