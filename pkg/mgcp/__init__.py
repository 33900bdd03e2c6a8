"""Multiparameter generalized counting process: distributions, samplers and integrals."""
from .gcp_core import MultiTime, PmfTable, RateMatrix
from .fractional_variants import FractionalOrders, VariantKind
from .integrals import IntegralSpec
from .samplers import RngStream, SamplePath
from .special_functions import MlfParams, SeriesResult

__all__ = [
    "FractionalOrders",
    "IntegralSpec",
    "MlfParams",
    "MultiTime",
    "PmfTable",
    "RateMatrix",
    "RngStream",
    "SamplePath",
    "SeriesResult",
    "VariantKind",
]
