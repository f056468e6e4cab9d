#  Copyright (c) 2021 robfit
from typing import Any, Callable, Iterable, List, Sequence, Tuple, Union

import numpy as np

# The #: symbols at the end of every type alias are for marking the module level variables
# as documented, such that sphinx will document them.

ResidualInput = Union[float, np.ndarray, Sequence[float]]  #:
ResidualReturn = Union[float, np.ndarray]  #:

AlphaType = float  #:
ScaleType = float  #:

KernelInput = Union["robfit.core.kernel.KernelParams", "robfit.core.kernel.NamedKernel"]  #:

ThetaType = Any  #: problem specific parameter state (array, RigidTransform, BAState, ...)
DeltaType = np.ndarray  #: tangent space increment

PointsInput = Union[np.ndarray, Sequence[Sequence[float]]]  #:
CorrespondenceType = np.ndarray  #: integer index per source point

SeedType = Union[None, int, np.random.SeedSequence, np.random.Generator]  #:

PolicyInput = Union[str, Iterable[str]]  #:
SigmasInput = Union[float, Iterable[float]]  #:

PathType = Union[str, "os.PathLike"]  #:

MapFuncType = Callable[[Any], Any]  #:
RecordsType = List[dict]  #:
PairType = Tuple[float, float]  #:
