"""Exact toolkit for ignorability of missing-data mechanisms on finite models."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DomainError,
    LabError,
    PreconditionError,
    ResourceError,
    StructuralError,
    TheoremViolation,
    UsageError,
    ValidationError,
)
from .model import (  # noqa: E402
    ConditioningFunction,
    DataSpace,
    DiscreteDataModel,
    JointParameterSpace,
    MissingnessModel,
    ModelBundle,
    Pattern,
    Realisation,
    extract_missing,
    extract_observed,
)

__all__ = [
    "__version__", "LabError", "StructuralError", "DomainError", "UsageError", "PreconditionError",
    "ResourceError", "ValidationError", "TheoremViolation", "DataSpace", "Pattern", "Realisation",
    "DiscreteDataModel", "MissingnessModel", "JointParameterSpace", "ConditioningFunction",
    "ModelBundle", "extract_observed", "extract_missing",
]
