"""Estimation of mean orientation and concentration for distributions on
the quaternion sphere that are invariant under a finite rotation group."""

from .estimators import (
    FundamentalZoneMapper,
    FundamentalZoneVMF,
    GInvariantKDE,
    GInvariantVMF,
    VonMisesFisher,
)
from .ginv import EmConfig, EmResult, GInvariantVmf, em_fit, kde_ginv, modified_ml_fit, sample_ginv
from .symgrp import SymmetryGroup, builtin_group, load_group, map_to_fz
from .vmf import KAPPA_MAX, VmfParams

__version__ = "0.1.0"

__all__ = [
    "EmConfig",
    "EmResult",
    "FundamentalZoneMapper",
    "FundamentalZoneVMF",
    "GInvariantKDE",
    "GInvariantVMF",
    "GInvariantVmf",
    "KAPPA_MAX",
    "SymmetryGroup",
    "VmfParams",
    "VonMisesFisher",
    "builtin_group",
    "em_fit",
    "kde_ginv",
    "load_group",
    "map_to_fz",
    "modified_ml_fit",
    "sample_ginv",
]
