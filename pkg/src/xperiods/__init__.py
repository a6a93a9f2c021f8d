"""Exponential periods, rapid decay homology models and definable volumes."""

__version__ = "0.1.0"

from .errors import XpError  # noqa: E402

__all__ = ["XpError", "__version__"]
