"""Numerical toolkit for Ricci flow neckpinches on warped products."""
from .scales import DomainError, Profile, ScaleContext, make_profile
from .pinch import ModelPinch, builtin_profiles, get_pinch, validate_model_pinch
from .bryant import BryantTables, build_tables

__version__ = "0.1.0"

__all__ = [
    "DomainError", "Profile", "ScaleContext", "make_profile", "ModelPinch",
    "builtin_profiles", "get_pinch", "validate_model_pinch", "BryantTables",
    "build_tables", "__version__",
]
