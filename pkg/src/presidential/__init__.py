"""Rounding schemes and certification for presidential-type predicates."""
from .errors import *  # noqa: F401,F403
from .predicate import Predicate, from_delta, new_predicate

__all__ = ["Predicate", "from_delta", "new_predicate"]
__version__ = "0.1.0"
