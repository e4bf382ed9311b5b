"""Partition-of-unity test functions, extension of singular distributions,
and the regularised propagator, loop and splitting observables built on them.

The functional core lives in the submodules; ``estimators`` wraps the two
most common entry points for scikit-learn pipelines.
"""
from . import extend, lagrange, qft, quadrature, split, testfunc
from .errors import (
    ConvergenceError,
    DegenerateDecompositionError,
    IndeterminateOrderError,
    InputError,
    NonIntegrableError,
    PouError,
    UnsupportedOrderError,
)
from .estimators import DistributionExtender, TestFunctionTransformer
from .extend import SingularDistribution, builtin_distribution, extend_ir, extend_uv, extend_uv_alt, scaling_order
from .quadrature import QuadratureConfig, integrate_1d, integrate_nd, integrate_pv
from .testfunc import PartitionParams, Srtf, SrtfParams

__version__ = "0.1.0"

__all__ = [
    "extend", "lagrange", "qft", "quadrature", "split", "testfunc",
    "PouError", "InputError", "ConvergenceError", "UnsupportedOrderError",
    "IndeterminateOrderError", "DegenerateDecompositionError", "NonIntegrableError",
    "TestFunctionTransformer", "DistributionExtender",
    "SingularDistribution", "builtin_distribution", "scaling_order",
    "extend_ir", "extend_uv", "extend_uv_alt",
    "QuadratureConfig", "integrate_1d", "integrate_nd", "integrate_pv",
    "PartitionParams", "Srtf", "SrtfParams",
]
