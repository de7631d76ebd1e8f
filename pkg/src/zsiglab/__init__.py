"""Exact experiments on heights, orbits and primitive prime divisors of unicritical maps."""

__version__ = "0.1.0"

from .dynamics import UnicriticalMap, iterate
from .factoring import FactorBudget, factor_integer
from .heights import height
from .numfield import QQ, NumberField, field_from_spec

__all__ = [
    "__version__",
    "FactorBudget",
    "NumberField",
    "QQ",
    "UnicriticalMap",
    "factor_integer",
    "field_from_spec",
    "height",
    "iterate",
]
