#  Copyright (c) 2021 robfit

from .util.exception import (ConfigError, DomainError, GridMismatchError, InvalidKernelParamsError,
                             MissingNormalsError, NonFiniteResidualError, PartitionLookupError,
                             PointCloudFormatError, ResidualFileError, SceneFormatError, SolverError,
                             TableConstructionError, TableFormatError)

__all__ = ['DomainError', 'InvalidKernelParamsError', 'NonFiniteResidualError', 'MissingNormalsError',
           'PartitionLookupError', 'TableConstructionError', 'TableFormatError', 'SolverError',
           'GridMismatchError', 'ConfigError', 'PointCloudFormatError', 'SceneFormatError', 'ResidualFileError']
