"""Entropy-stable, split-form and divergence-form LGL collocation solvers for
the 3-D compressible Euler and Navier-Stokes equations."""
from .fluxes import FluxScheme, SCHEMES
from .gas import AdmissibilityError, GasModel
from .mesh import Grid, build_cartesian, build_warped
from .sbp import ConfigurationError, SbpOperator1D, TensorOperator, build_lgl, build_tensor
from .solver import SemiDiscretization
from .timestep import Tolerances, advance, step
from .viscous import ViscousConfig

__all__ = [
    "AdmissibilityError", "ConfigurationError", "FluxScheme", "GasModel", "Grid", "SCHEMES",
    "SbpOperator1D", "SemiDiscretization", "TensorOperator", "Tolerances", "ViscousConfig",
    "advance", "build_cartesian", "build_lgl", "build_tensor", "build_warped", "step",
]
__version__ = "0.1.0"
