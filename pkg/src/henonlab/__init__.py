"""henonlab: numerics for complex Henon maps and their 1D quadratic shadow."""

from .dynamics import (
    BudgetExceeded,
    DomainError,
    EscapeOutcome,
    HenonParams,
    MapWord,
    OrbitEscaped,
    Point2,
    QuadParam,
    dynamical_degree,
    escape_time,
    inverse_conjugate,
    iterate,
)
from .quadratic import (
    ExponentEstimate,
    GreenValue,
    brolin_sample,
    connectivity_1d,
    green_1d,
    lyapunov_1d,
)

__version__ = "0.1.0"
