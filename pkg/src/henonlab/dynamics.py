"""Map families and iteration with a sound escape filtration.

The central object is the quadratic Henon family

    f(x, y) = (a - b*y - x**2, x),        b != 0,

a polynomial diffeomorphism of C^2 with constant Jacobian determinant b.
Its inverse is again polynomial,

    f^-1(x, y) = (y, (a - y**2 - x) / b),

and, after swapping coordinates and rescaling by b, the inverse is conjugate
to the Henon map with parameters (a / b**2, 1 / b).  Escape of an orbit to
infinity is decided by a filtration certificate rather than a bare radius
test, so "escaped" answers are mathematically sound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Optional, Union

__all__ = [
    "DomainError",
    "BudgetExceeded",
    "OrbitEscaped",
    "QuadParam",
    "HenonParams",
    "Point2",
    "EscapeOutcome",
    "AffineFactor",
    "ElementaryFactor",
    "HenonFactor",
    "MapWord",
    "DegreeGrowth",
    "iterate",
    "henon_step",
    "henon_step_back",
    "escape_time",
    "inverse_conjugate",
    "dynamical_degree",
]

OVERFLOW_GUARD = 1e150

# Escape certificates demand |x| > R * (1 + CERT_MARGIN), not a bare |x| > R:
# fixed points can sit exactly on the filtration circle (at a = 6, b = 0.3
# one does), where an ulp of rounding would otherwise certify a bounded orbit.
CERT_MARGIN = 1e-12

# Orbits revisiting their start this closely are treated as periodic shadows.
CYCLE_TOL = 1e-10

Direction = Literal["forward", "backward"]


class DomainError(ValueError):
    """A map parameter or argument violates a precondition."""


class BudgetExceeded(RuntimeError):
    """A resource guard (term count, cost cap, search budget) tripped."""


class OrbitEscaped(RuntimeError):
    """Orbit left the overflow guard radius during plain iteration.

    This is an outcome, not a failure: the exception carries the step at
    which the guard fired and the sup-norm magnitude seen there.
    """

    def __init__(self, step: int, magnitude: float):
        super().__init__(f"orbit escaped at step {step} (sup-norm {magnitude:.6g})")
        self.step = step
        self.magnitude = magnitude


def _require_finite(name: str, z: complex) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"{name} must be finite, got {z!r}")
    return z


@dataclass(frozen=True)
class QuadParam:
    """Parameter of the one-dimensional quadratic family x -> a - x**2."""

    a: complex

    def __post_init__(self):
        object.__setattr__(self, "a", _require_finite("a", self.a))

    @property
    def escape_radius(self) -> float:
        """Radius past which |a - x**2| >= |x|**2 - |a| grows monotonically.

        max(2, (1 + sqrt(1 + 4|a|)) / 2, |a|): beyond the middle entry,
        |x|**2 - |x| - |a| > 0, so each iterate strictly exceeds the last.
        """
        m = abs(self.a)
        return max(2.0, (1.0 + math.sqrt(1.0 + 4.0 * m)) / 2.0, m)

    def apply(self, x: complex) -> complex:
        return self.a - x * x


@dataclass(frozen=True)
class HenonParams:
    """Parameters (a, b) of the quadratic Henon map, b != 0."""

    a: complex
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "a", _require_finite("a", self.a))
        object.__setattr__(self, "b", _require_finite("b", self.b))
        if self.b == 0:
            raise DomainError("b must be nonzero (b = 0 degenerates to the 1D family)")

    degree: int = field(default=2, init=False, repr=False)

    @property
    def jacobian(self) -> complex:
        """Determinant of the differential; constant and equal to b."""
        return self.b

    @property
    def filtration_radius(self) -> float:
        """Radius R of the escape filtration.

        R is the positive root of t**2 - (1+|b|)t - |a| = 0 (clamped to at
        least 2).  For |x| > max(R, |y|) the next x-coordinate satisfies
        |x'| >= |x|**2 - |b||x| - |a| >= |x|**2 / R, so modulus grows by a
        factor >= |x|/R > 1 and the escape certificate below is one-sided.
        """
        am, bm = abs(self.a), abs(self.b)
        return max(2.0, (1.0 + bm + math.sqrt((1.0 + bm) ** 2 + 4.0 * am)) / 2.0)


@dataclass(frozen=True)
class Point2:
    """A point of C^2 with finite components."""

    x: complex
    y: complex

    def __post_init__(self):
        object.__setattr__(self, "x", _require_finite("x", self.x))
        object.__setattr__(self, "y", _require_finite("y", self.y))

    @property
    def sup_norm(self) -> float:
        return max(abs(self.x), abs(self.y))

    def is_close(self, other: "Point2", tol: float) -> bool:
        return max(abs(self.x - other.x), abs(self.y - other.y)) <= tol


def henon_step(params: HenonParams, x: complex, y: complex) -> tuple[complex, complex]:
    return params.a - params.b * y - x * x, x


def henon_step_back(params: HenonParams, x: complex, y: complex) -> tuple[complex, complex]:
    return y, (params.a - y * y - x) / params.b


def iterate(params: HenonParams, p: Point2, n: int) -> Point2:
    """Return f^n(p); negative n iterates the inverse map.

    Raises OrbitEscaped when a component exceeds the overflow guard, so
    callers never see infinities.  Composition iterate(p, m+n) ==
    iterate(iterate(p, m), n) holds up to round-off.
    """
    x, y = p.x, p.y
    step = henon_step if n >= 0 else henon_step_back
    for k in range(abs(n)):
        x, y = step(params, x, y)
        m = max(abs(x), abs(y))
        if m > OVERFLOW_GUARD:
            raise OrbitEscaped(k + 1, m)
    return Point2(x, y)


@dataclass(frozen=True)
class EscapeOutcome:
    """Result of the filtration test: escaped(step, magnitude) or bounded.

    `bounded` means no escape certificate fired within the iteration budget;
    membership in the bounded-orbit set is only ever certified negatively.
    """

    escaped: bool
    step: Optional[int] = None
    magnitude: Optional[float] = None

    @property
    def bounded(self) -> bool:
        return not self.escaped


def _forward_certificate(params: HenonParams, x: complex, y: complex) -> bool:
    # |x| > R and |x| >= |y|: forward-invariant region of monotone growth.
    ax = abs(x)
    return ax > params.filtration_radius * (1.0 + CERT_MARGIN) and ax >= abs(y)


def _backward_certificate(params: HenonParams, x: complex, y: complex) -> bool:
    # Mirror region for the inverse map: |y| > R and |y| >= |x|.
    ay = abs(y)
    return ay > params.filtration_radius * (1.0 + CERT_MARGIN) and ay >= abs(x)


def escape_time(
    params: HenonParams,
    p: Point2,
    direction: Direction = "forward",
    max_iter: int = 1000,
) -> EscapeOutcome:
    """First step at which the filtration certifies escape, if any.

    The certificate requires both sup-norm > R and dominance of the
    expanding coordinate, which makes "escaped" permanent under further
    iteration (not a heuristic threshold crossing).  An orbit returning to
    within 1e-10 of its start before certification is reported bounded:
    the input shadows a periodic orbit whose rounding would otherwise
    drift off along the unstable direction and escape spuriously.
    """
    if max_iter < 1:
        raise DomainError("max_iter must be >= 1")
    if direction == "forward":
        step, cert = henon_step, _forward_certificate
    elif direction == "backward":
        step, cert = henon_step_back, _backward_certificate
    else:
        raise DomainError(f"unknown direction {direction!r}")

    x, y = p.x, p.y
    x0, y0 = x, y
    for k in range(max_iter + 1):
        if cert(params, x, y):
            return EscapeOutcome(True, k, max(abs(x), abs(y)))
        if k >= 1 and max(abs(x - x0), abs(y - y0)) <= CYCLE_TOL:
            return EscapeOutcome(False)
        if k == max_iter:
            break
        x, y = step(params, x, y)
        if max(abs(x), abs(y)) > OVERFLOW_GUARD:
            return EscapeOutcome(True, k + 1, max(abs(x), abs(y)))
    return EscapeOutcome(False)


def inverse_conjugate(params: HenonParams) -> HenonParams:
    """Henon parameters of the map conjugate to f^-1.

    With s(x, y) = (b*x, b*y) and the coordinate swap sigma(x, y) = (y, x),

        f^-1 = sigma . s . g . s^-1 . sigma,     g = Henon(a / b**2, 1 / b),

    so backward dynamics of f is forward dynamics of g up to the fixed
    affine change sigma . s, which escape rates do not see in the limit.
    Concretely G^-_f(x, y) = G^+_g(y / b, x / b).
    """
    b = params.b
    return HenonParams(params.a / (b * b), 1.0 / b)


def inverse_chart(params: HenonParams, p: Point2) -> Point2:
    """Coordinates of p in the chart where f^-1 becomes `inverse_conjugate`."""
    b = params.b
    return Point2(p.y / b, p.x / b)


# ---------------------------------------------------------------------------
# Symbolic polynomial pairs and dynamical degree
# ---------------------------------------------------------------------------

Coeff = Union[int, Fraction, complex]
Terms = dict[tuple[int, int], Coeff]

TERM_GUARD = 10**6
_PRUNE_REL = 1e-12


@dataclass(frozen=True)
class AffineFactor:
    """(x, y) -> M (x, y) + t with invertible M."""

    m00: complex
    m01: complex
    m10: complex
    m11: complex
    t0: complex = 0.0
    t1: complex = 0.0

    def __post_init__(self):
        if self.m00 * self.m11 - self.m01 * self.m10 == 0:
            raise DomainError("affine factor must be invertible")


@dataclass(frozen=True)
class ElementaryFactor:
    """Triangular map (x, y) -> (alpha*x + p(y), beta*y + gamma)."""

    alpha: complex
    beta: complex
    gamma: complex = 0.0
    p_coeffs: tuple[complex, ...] = (0.0,)  # ascending powers of y

    def __post_init__(self):
        if self.alpha == 0 or self.beta == 0:
            raise DomainError("elementary factor must have alpha, beta nonzero")


@dataclass(frozen=True)
class HenonFactor:
    params: HenonParams


Factor = Union[AffineFactor, ElementaryFactor, HenonFactor]


@dataclass(frozen=True)
class MapWord:
    """A composition of factors, applied left to right (factors[0] first)."""

    factors: tuple[Factor, ...]

    def __post_init__(self):
        if not self.factors:
            raise DomainError("map word must be nonempty")

    @property
    def pure_henon(self) -> bool:
        return all(isinstance(f, HenonFactor) for f in self.factors)


def _exactable(z: complex) -> bool:
    return complex(z).imag == 0


def _to_coeff(z, exact: bool) -> Coeff:
    if exact:
        # Fraction(float) is the exact binary value, so no rounding enters.
        return Fraction(complex(z).real)
    return complex(z)


def _word_exact(word: MapWord) -> bool:
    vals: list[complex] = []
    for f in word.factors:
        if isinstance(f, HenonFactor):
            vals += [f.params.a, f.params.b]
        elif isinstance(f, AffineFactor):
            vals += [f.m00, f.m01, f.m10, f.m11, f.t0, f.t1]
        else:
            vals += [f.alpha, f.beta, f.gamma, *f.p_coeffs]
    return all(_exactable(v) for v in vals)


def _prune(t: Terms, exact: bool) -> Terms:
    if exact:
        return {k: c for k, c in t.items() if c != 0}
    if not t:
        return t
    top = max(abs(c) for c in t.values())
    if top == 0:
        return {}
    return {k: c for k, c in t.items() if abs(c) > _PRUNE_REL * top}

def _p_mul(s: Terms, t: Terms) -> Terms:
    out: Terms = {}
    for (i1, j1), c1 in s.items():
        for (i2, j2), c2 in t.items():
            k = (i1 + i2, j1 + j2)
            out[k] = out.get(k, 0) + c1 * c2
    return out


def _p_degree(t: Terms) -> int:
    return max((i + j for (i, j) in t.keys()), default=0)


def _compose(outer: Terms, px: Terms, py: Terms, exact: bool) -> Terms:
    """outer(px, py) via cached powers of the inner pair."""
    one: Terms = {(0, 0): _to_coeff(1, exact)}
    xs: list[Terms] = [one]
    ys: list[Terms] = [one]
    max_i = max((i for (i, _) in outer.keys()), default=0)
    max_j = max((j for (_, j) in outer.keys()), default=0)
    for _ in range(max_i):
        xs.append(_prune(_p_mul(xs[-1], px), exact))
    for _ in range(max_j):
        ys.append(_prune(_p_mul(ys[-1], py), exact))
    out: Terms = {}
    for (i, j), c in outer.items():
        term = _p_mul(xs[i], ys[j])
        for k, v in term.items():
            out[k] = out.get(k, 0) + c * v
    return _prune(out, exact)


def _factor_pair(f: Factor, exact: bool) -> tuple[Terms, Terms]:
    X: Terms = {(1, 0): _to_coeff(1, exact)}
    Y: Terms = {(0, 1): _to_coeff(1, exact)}
    if isinstance(f, HenonFactor):
        a, b = f.params.a, f.params.b
        px = {(0, 0): _to_coeff(a, exact), (0, 1): _to_coeff(-b, exact),
              (2, 0): _to_coeff(-1, exact)}
        return _prune(px, exact), X
    if isinstance(f, AffineFactor):
        px = {(1, 0): _to_coeff(f.m00, exact), (0, 1): _to_coeff(f.m01, exact),
              (0, 0): _to_coeff(f.t0, exact)}
        py = {(1, 0): _to_coeff(f.m10, exact), (0, 1): _to_coeff(f.m11, exact),
              (0, 0): _to_coeff(f.t1, exact)}
        return _prune(px, exact), _prune(py, exact)
    if isinstance(f, ElementaryFactor):
        px = {(1, 0): _to_coeff(f.alpha, exact)}
        for j, c in enumerate(f.p_coeffs):
            px[(0, j)] = px.get((0, j), 0) + _to_coeff(c, exact)
        py = {(0, 1): _to_coeff(f.beta, exact), (0, 0): _to_coeff(f.gamma, exact)}
        return _prune(px, exact), _prune(py, exact)
    raise DomainError(f"unknown factor {type(f).__name__}")


def _guard_compose(deg_outer: int, deg_inner: int) -> None:
    d = max(deg_outer, 1) * max(deg_inner, 1)
    if (d + 1) * (d + 2) // 2 > TERM_GUARD:
        raise BudgetExceeded(
            f"predicted term count for degree {d} exceeds {TERM_GUARD}"
        )


def _word_pair(word: MapWord, exact: bool) -> tuple[Terms, Terms]:
    px: Terms = {(1, 0): _to_coeff(1, exact)}
    py: Terms = {(0, 1): _to_coeff(1, exact)}
    for f in word.factors:
        fx, fy = _factor_pair(f, exact)
        deg_f = max(_p_degree(fx), _p_degree(fy))
        deg_in = max(_p_degree(px), _p_degree(py))
        _guard_compose(deg_f, deg_in)
        px, py = _compose(fx, px, py, exact), _compose(fy, px, py, exact)
    return px, py


@dataclass(frozen=True)
class DegreeGrowth:
    """Algebraic degrees of f, f^2, ..., plus the growth-rate estimate.

    `exact` carries the known limit when the word is a pure composition of
    Henon factors (the product of their degrees); otherwise None and only
    the finite-sample estimate (deg f^n_max)^(1/n_max) is available.
    """

    degrees: tuple[int, ...]
    estimate: float
    exact: Optional[int]


def dynamical_degree(word: MapWord, n_max: int) -> DegreeGrowth:
    """Degrees of iterates by symbolic composition of the polynomial pair.

    Coefficients stay exact (integer/Fraction) whenever every factor
    parameter is real, which protects degree extraction from cancellation;
    otherwise complex doubles with relative pruning are used.
    """
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    exact_mode = _word_exact(word)
    fx, fy = _word_pair(word, exact_mode)
    px, py = fx, fy
    degrees = [max(_p_degree(px), _p_degree(py))]
    for _ in range(n_max - 1):
        deg_f = max(_p_degree(fx), _p_degree(fy))
        _guard_compose(deg_f, degrees[-1])
        px, py = _compose(fx, px, py, exact_mode), _compose(fy, px, py, exact_mode)
        degrees.append(max(_p_degree(px), _p_degree(py)))
    estimate = degrees[-1] ** (1.0 / n_max)
    exact = None
    if word.pure_henon:
        exact = 1
        for _ in word.factors:
            exact *= 2
    return DegreeGrowth(tuple(degrees), estimate, exact)
