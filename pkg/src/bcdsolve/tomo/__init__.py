"""Desk-scale multi-spectral fan-beam X-ray tomography."""

from .geometry import FanBeamGeometry, FanBeamProjector
from .pgm import read_pgm, write_pgm
from .phantom import (
    attenuation_table,
    head_phantom,
    load_two_column_table,
    source_spectrum,
    two_material_model,
)
from .recon import run_nonlinear
from .spectral import ForwardStack, MultiSpectralOperator, SpectralModel, exp_derivative

__all__ = [
    "FanBeamGeometry",
    "FanBeamProjector",
    "ForwardStack",
    "MultiSpectralOperator",
    "SpectralModel",
    "attenuation_table",
    "exp_derivative",
    "head_phantom",
    "load_two_column_table",
    "read_pgm",
    "run_nonlinear",
    "source_spectrum",
    "two_material_model",
    "write_pgm",
]
