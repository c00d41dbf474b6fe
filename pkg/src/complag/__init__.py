"""Complex Lagrangian mechanics with Wirtinger calculus."""

from .calculus import partial, time_derivative, to_real_chart, wirtinger_fd_check
from .errors import ComplagError
from .expr import conjugate, simplify, substitute
from .numeric import equal_numeric, evaluate
from .parser import parse_expr, parse_system
from .printer import print_expr

__version__ = "0.1.0"

__all__ = [
    "ComplagError",
    "conjugate",
    "equal_numeric",
    "evaluate",
    "parse_expr",
    "parse_system",
    "partial",
    "print_expr",
    "simplify",
    "substitute",
    "time_derivative",
    "to_real_chart",
    "wirtinger_fd_check",
]
