#  Copyright (c) 2021 robfit


# Input errors
class DomainError(ValueError):
    """A numerical input lies outside the domain of an operation.

    Examples are a non-finite residual, a non-positive scale or truncation limit or an empty residual set.
    """
    pass


class InvalidKernelParamsError(DomainError):
    pass


class NonFiniteResidualError(DomainError):

    def __init__(self, msg, block_index: int, *args: object) -> None:
        """A residual block evaluated to NaN or infinity.

        Args:
            msg: Human readable message.
            block_index: Index of the first offending residual block.
        """
        super().__init__(msg, *args)
        self.block_index = block_index


class MissingNormalsError(DomainError):
    pass


# Partition table errors
class PartitionLookupError(KeyError):
    """The requested shape parameter is not a point of the partition table grid.

    Quantize with :py:meth:`~robfit.core.partition.PartitionTable.quantize` before the lookup.
    """
    pass


class TableConstructionError(RuntimeError):
    """The quadrature produced a table that violates its sanity checks (misconfigured quadrature)."""
    pass


class TableFormatError(ValueError):
    pass


# Solver errors
class SolverError(RuntimeError):
    pass


class GridMismatchError(SolverError):
    pass


# File and configuration errors
class ConfigError(ValueError):

    def __init__(self, msg, line=None, *args: object) -> None:
        if line is not None:
            msg = f"line {line}: {msg}"
        super().__init__(msg, *args)
        self.line = line


class PointCloudFormatError(ValueError):
    pass


class SceneFormatError(ValueError):
    pass


class ResidualFileError(ValueError):

    def __init__(self, msg, line=None, *args: object) -> None:
        if line is not None:
            msg = f"line {line}: {msg}"
        super().__init__(msg, *args)
        self.line = line
