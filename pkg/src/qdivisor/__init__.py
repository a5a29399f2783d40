"""Exact verification of divisor-generating q-series identities."""
from .scalars import Cyclo, as_scalar, parse_rational
from .series import Series, VarSpec, format_series

__version__ = "0.1.0"

__all__ = ["Cyclo", "Series", "VarSpec", "as_scalar", "format_series", "parse_rational", "__version__"]
