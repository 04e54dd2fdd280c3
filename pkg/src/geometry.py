"""
Warped-product model spaces M^m_f(o) = ([0, b) x S^{m-1}, dr^2 + f(r)^2 g^{S^{m-1}}).

Holds the warping functions, the curvature quantities that only depend on
them, sphere volumes and the composite Gauss-Legendre rule every radial
integral in the package goes through.
"""
import math
from dataclasses import dataclass

import numpy as np

from src.errors import (
    DomainError,
    EvaluationError,
    RangeError,
    SingularityError,
    UnsupportedDimensionError,
    UnsupportedOrderError,
    UnsupportedTargetError,
)

WARPING_KINDS = ('flat', 'spherical', 'hyperbolic', 'custom')

# Gauss-Legendre, 5 nodes per panel (exact for degree 9)
GAUSS_NODES, GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(5)

MAX_SUBINTERVALS = 2 ** 20

# sample radius for the f(0)=0, f'(0)=1 check on custom warpings
POLE_SAMPLE_R = 1e-6
POLE_TOLERANCE = 1e-4


def is_positive_number(value):
    """True for a finite real number > 0 (bools excluded)"""
    return (isinstance(value, (int, float)) and not isinstance(value, bool)
            and math.isfinite(value) and value > 0)


def _format_bound(value):
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


@dataclass(frozen=True)
class Interval:
    """A real interval whose ends may be open, closed or infinite"""
    lower: float
    upper: float
    lower_closed: bool = True
    upper_closed: bool = True

    def contains(self, r):
        if math.isnan(r):
            return False
        if r < self.lower or (r == self.lower and not self.lower_closed):
            return False
        if r > self.upper or (r == self.upper and not self.upper_closed):
            return False
        return True

    def intersect(self, other):
        if self.lower > other.lower:
            lower, lower_closed = self.lower, self.lower_closed
        elif other.lower > self.lower:
            lower, lower_closed = other.lower, other.lower_closed
        else:
            lower, lower_closed = self.lower, self.lower_closed and other.lower_closed
        if self.upper < other.upper:
            upper, upper_closed = self.upper, self.upper_closed
        elif other.upper < self.upper:
            upper, upper_closed = other.upper, other.upper_closed
        else:
            upper, upper_closed = self.upper, self.upper_closed and other.upper_closed
        return Interval(lower, upper, lower_closed, upper_closed)

    def describe(self):
        left = '[' if self.lower_closed and not math.isinf(self.lower) else '('
        right = ']' if self.upper_closed and not math.isinf(self.upper) else ')'
        return f"{left}{_format_bound(self.lower)},{_format_bound(self.upper)}{right}"

    def __str__(self):
        return self.describe()


@dataclass(frozen=True)
class WarpingFunction:
    """
    Warping function f of a model space together with its first three
    derivatives. `derivatives[i]` maps r to f^(i)(r).
    """
    kind: str
    derivatives: tuple
    domain: Interval
    target_range: Interval = None

    @property
    def target_domain(self):
        """Values of rho the warping accepts when it describes a target"""
        return self.target_range or self.domain

    def evaluate(self, r, order=0):
        if order < 0 or order > 3:
            raise UnsupportedOrderError(f"warping derivatives are available up to order 3, got {order}")
        if not self.domain.contains(r):
            raise DomainError(f"r={r!r} is outside the {self.kind} warping domain {self.domain}")
        return float(self.derivatives[order](r))

    def evaluate_target(self, rho, order=0):
        """f^(order)(rho) for a target value rho; RangeError outside target_domain"""
        if order < 0 or order > 3:
            raise UnsupportedOrderError(f"warping derivatives are available up to order 3, got {order}")
        if not self.target_domain.contains(rho):
            raise RangeError(f"rho={rho!r} is outside the target domain {self.target_domain}")
        return float(self.derivatives[order](rho))

    @property
    def max_order(self):
        return 3


@dataclass(frozen=True)
class ModelSpace:
    """A rotationally symmetric model of dimension m >= 2"""
    dimension: int
    warping: WarpingFunction

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 2:
            raise DomainError(f"model dimension must be an integer >= 2, got {self.dimension!r}")


def flat_warping():
    """f(r) = r on [0, inf); as a target it covers all of R (maps into R^n minus the origin)"""
    return WarpingFunction(
        kind='flat',
        derivatives=(lambda r: r, lambda r: 1.0, lambda r: 0.0, lambda r: 0.0),
        domain=Interval(0.0, math.inf, True, False),
        target_range=Interval(-math.inf, math.inf, False, False),
    )


def spherical_warping():
    """f(r) = sin r on [0, pi]"""
    return WarpingFunction(
        kind='spherical',
        derivatives=(math.sin, math.cos, lambda r: -math.sin(r), lambda r: -math.cos(r)),
        domain=Interval(0.0, math.pi, True, True),
    )


def hyperbolic_warping():
    """f(r) = sinh r on [0, inf)"""
    return WarpingFunction(
        kind='hyperbolic',
        derivatives=(math.sinh, math.cosh, math.sinh, math.cosh),
        domain=Interval(0.0, math.inf, True, False),
    )


BUILTIN_WARPINGS = {
    'flat': flat_warping,
    'spherical': spherical_warping,
    'hyperbolic': hyperbolic_warping,
}


def builtin_warping(kind):
    try:
        return BUILTIN_WARPINGS[kind]()
    except KeyError:
        raise DomainError(f"unknown warping kind {kind!r}; expected one of {sorted(BUILTIN_WARPINGS)}")


def custom_warping(derivatives, upper=math.inf, upper_closed=False, check_pole=True):
    """
    Build a warping from analytic derivatives f, f', f'', f'''.

    The pole conditions f(0)=0, f'(0)=1 are checked at r = 1e-6 to a relative
    1e-4 unless `check_pole` is off (homothetic targets have f'(0) != 1).
    """
    derivatives = tuple(derivatives)
    if len(derivatives) != 4:
        raise UnsupportedOrderError("custom warpings must supply f, f', f'' and f'''")
    warping = WarpingFunction(
        kind='custom',
        derivatives=derivatives,
        domain=Interval(0.0, float(upper), True, bool(upper_closed)),
    )
    if check_pole:
        value = derivatives[0](POLE_SAMPLE_R)
        slope = derivatives[1](POLE_SAMPLE_R)
        if abs(value / POLE_SAMPLE_R - 1.0) > POLE_TOLERANCE or abs(slope - 1.0) > POLE_TOLERANCE:
            raise DomainError(
                f"custom warping violates f(0)=0, f'(0)=1 near the pole "
                f"(f({POLE_SAMPLE_R})={value!r}, f'({POLE_SAMPLE_R})={slope!r})"
            )
    return warping


def warp_eval(w, r, order=0):
    """Return f^(order)(r)"""
    return w.evaluate(r, order)


def radial_curvature(w, r):
    """Radial sectional curvature K(r) = -f''(r)/f(r) from the Jacobi equation"""
    if r <= 0:
        raise DomainError(f"radial curvature needs r > 0, got {r!r}")
    f = w.evaluate(r, 0)
    if f == 0.0:
        raise SingularityError(f"warping vanishes at r={r!r}")
    return -w.evaluate(r, 2) / f


def space_form_curvature(w):
    """Constant sectional curvature of a built-in space-form warping"""
    curvatures = {'flat': 0.0, 'spherical': 1.0, 'hyperbolic': -1.0}
    if w.kind not in curvatures:
        raise UnsupportedTargetError(f"warping kind {w.kind!r} is not a space form")
    return curvatures[w.kind]


def target_scalar_curvature(target, rho):
    """
    Scalar curvature of a 4-dimensional model at radius rho:
    6/l^2 - 6 l l''/l^2 - 6 l'^2/l^2.
    """
    if target.dimension != 4:
        raise UnsupportedDimensionError(
            f"scalar curvature is only available for 4-dimensional models, got {target.dimension}"
        )
    lam = target.warping.evaluate(rho, 0)
    if lam == 0.0:
        raise SingularityError(f"target warping vanishes at rho={rho!r}")
    lam1 = target.warping.evaluate(rho, 1)
    lam2 = target.warping.evaluate(rho, 2)
    return (6.0 - 6.0 * lam * lam2 - 6.0 * lam1 * lam1) / (lam * lam)


def _gamma_half_integer(x):
    """Gamma at a positive integer or half-integer by recursion"""
    twice = round(2 * x)
    if twice < 1 or abs(2 * x - twice) > 1e-12:
        raise DomainError(f"expected a positive integer or half-integer, got {x!r}")
    if twice % 2 == 0:
        value, current = 1.0, 1.0
    else:
        value, current = math.sqrt(math.pi), 0.5
    while current < x - 1e-12:
        value *= current
        current += 1.0
    return value


def sphere_volume(d):
    """Volume of the unit sphere S^d, 2 pi^((d+1)/2) / Gamma((d+1)/2)"""
    if int(d) != d or d < 1:
        raise DomainError(f"sphere dimension must be an integer >= 1, got {d!r}")
    half = (d + 1) / 2.0
    return 2.0 * math.pi ** half / _gamma_half_integer(half)


def quadrature_nodes(a, b, panels):
    """Nodes and weights of the composite 5-point Gauss-Legendre rule on [a, b]"""
    if panels < 1:
        raise DomainError(f"panels must be >= 1, got {panels}")
    width = (b - a) / panels
    centres = a + (np.arange(panels) + 0.5) * width
    nodes = (centres[:, None] + 0.5 * width * GAUSS_NODES[None, :]).ravel()
    weights = np.tile(0.5 * width * GAUSS_WEIGHTS, panels)
    return nodes, weights


def quadrature(f, a, b, panels):
    """
    Composite Gauss-Legendre rule with 5 nodes on each of `panels` equal panels.

    Args:
        f: callable of one real argument
        a, b: integration bounds, a <= b
        panels: number of panels, >= 1

    Returns:
        The quadrature value; 0 for an empty interval.
    """
    if panels < 1:
        raise DomainError(f"panels must be >= 1, got {panels}")
    if b < a:
        raise DomainError(f"expected a <= b, got a={a!r}, b={b!r}")
    if math.isinf(a) or math.isinf(b):
        raise DomainError("quadrature needs a finite interval")
    if a == b:
        return 0.0

    width = (b - a) / panels
    half = 0.5 * width
    total = 0.0
    for i in range(panels):
        centre = a + (i + 0.5) * width
        panel_sum = 0.0
        for node, weight in zip(GAUSS_NODES, GAUSS_WEIGHTS):
            x = centre + half * node
            value = f(x)
            if not math.isfinite(value):
                raise EvaluationError(f"non-finite integrand value {value!r} at r={x!r}", abscissa=x)
            panel_sum += weight * value
        total += half * panel_sum
    return total


def adaptive_quadrature(f, a, b, tol=1e-12, panels=1):
    """
    Double the panel count until two successive values agree to
    tol * (1 + |value|). Capped at 2^20 subintervals.
    """
    previous = quadrature(f, a, b, panels)
    while panels * 2 <= MAX_SUBINTERVALS:
        panels *= 2
        current = quadrature(f, a, b, panels)
        if abs(current - previous) <= tol * (1.0 + abs(current)):
            return current
        previous = current
    raise EvaluationError(f"quadrature on [{a!r}, {b!r}] did not settle within {MAX_SUBINTERVALS} subintervals")
