"""Lazily revealed random matrices for simulating iterative dynamics.

Gaussian (Ginibre) and Haar-distributed matrices are never stored.  Each
matrix-vector product ("probe") samples just enough fresh randomness, and
records it in a short list of Householder reflectors, so that all answers
are jointly distributed as if the whole matrix had been drawn up front.
``T`` probes of an ``n``-dimensional operator take ``O(n T)`` memory and
``O(n T^2)`` time.
"""

from ._errors import BudgetExhausted, OracleCapExceeded
from .base import LinearProbeOperator
from .dynamics import DynamicsError, DynamicsSpec, Trajectory, run
from .ensembles import (
    DenseOracleMatrix,
    EnsembleSpec,
    GOEOperator,
    SubsampledHaarOperator,
    USVOperator,
    build_operator,
    dense_haar,
    goe_probe,
    make_lazy,
    sample_dense,
    subsampled_probe,
    usv_probe,
)
from .ginibre import HDGinibre, ginibre_new, ginibre_probe, ginibre_probe_count
from .haar import HDHaar, haar_new, haar_probe, haar_reconstruct
from .randsrc import RandomSource, normal_vector
from .reflect import Reflector, ReflectorChain, apply, apply_adjoint, chain_apply, make_reflector

__version__ = "0.1.0"

__all__ = [
    "BudgetExhausted",
    "DenseOracleMatrix",
    "DynamicsError",
    "DynamicsSpec",
    "EnsembleSpec",
    "GOEOperator",
    "HDGinibre",
    "HDHaar",
    "LinearProbeOperator",
    "OracleCapExceeded",
    "RandomSource",
    "Reflector",
    "ReflectorChain",
    "SubsampledHaarOperator",
    "Trajectory",
    "USVOperator",
    "apply",
    "apply_adjoint",
    "build_operator",
    "chain_apply",
    "dense_haar",
    "ginibre_new",
    "ginibre_probe",
    "ginibre_probe_count",
    "goe_probe",
    "haar_new",
    "haar_probe",
    "haar_reconstruct",
    "make_lazy",
    "make_reflector",
    "normal_vector",
    "run",
    "sample_dense",
    "subsampled_probe",
    "usv_probe",
]
