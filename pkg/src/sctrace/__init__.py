"""Partition functions of 1D systems: exact, classical and semiclassical."""

from .errors import (
    ConfigError,
    DomainError,
    NumericalFailure,
    OutOfValidityError,
    SctraceError,
    SingularAmplitudeError,
    TruncationError,
    UnsupportedDegeneracyError,
    UnsupportedVariantError,
)
from .methods import METHODS, Evaluator, OrbitOptions
from .model import (
    DoubleWell,
    PolynomialWell,
    QuarticUV,
    SpinField,
    Temperature,
    UVPoint,
    build_potential,
    harmonic,
    qp_from_uv,
    uv_from_qp,
)
from .thermo import ThermoPoint

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DomainError", "NumericalFailure", "OutOfValidityError", "SctraceError",
    "SingularAmplitudeError", "TruncationError", "UnsupportedDegeneracyError",
    "UnsupportedVariantError", "METHODS", "Evaluator", "OrbitOptions", "DoubleWell",
    "PolynomialWell", "QuarticUV", "SpinField", "Temperature", "UVPoint", "build_potential",
    "harmonic", "qp_from_uv", "uv_from_qp", "ThermoPoint",
]
