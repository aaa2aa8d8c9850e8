"""Artin-Schreier towers of finite fields: arithmetic, orders, verification."""

from .bigint_factor import Budget, FactorCache, Factorization, factorize, is_prime
from .tower_field import TowerContext, TowerElement, build_context

__all__ = [
    "Budget",
    "FactorCache",
    "Factorization",
    "TowerContext",
    "TowerElement",
    "build_context",
    "factorize",
    "is_prime",
]
__version__ = "0.1.0"
