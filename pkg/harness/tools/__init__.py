from .ComputePmf import ComputePmf
from .ComputeResidual import ComputeResidual
from .EvaluateMittagLeffler import EvaluateMittagLeffler
from .RunVerification import RunVerification
from .SampleIntegral import SampleIntegral
from .SamplePaths import SamplePaths, parse_grid

__all__ = [
    "ComputePmf",
    "ComputeResidual",
    "EvaluateMittagLeffler",
    "RunVerification",
    "SampleIntegral",
    "SamplePaths",
    "parse_grid",
]
