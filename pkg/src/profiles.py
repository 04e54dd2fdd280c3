"""
Radial profiles rho(r), the eigenmap catalog and the two map types
(equivariant maps between models, latitude maps from round spheres).
"""
import math
import re
from dataclasses import dataclass, field

import numpy as np
from fuzzywuzzy import process

from src.errors import (
    CatalogError,
    DomainError,
    EmptyProfileError,
    RangeError,
    UnsupportedOrderError,
)
from src.geometry import Interval, ModelSpace

POSITIVE_HALF_LINE = Interval(0.0, math.inf, False, False)

EIGENMAP_FAMILIES = ('identity', 'power', 'hopf')

# score below which a fuzzy match is not worth suggesting
SUGGESTION_CUTOFF = 60


def suggest(name, choices, limit=3):
    """Close matches of `name` among `choices`, best first"""
    if not name or not choices:
        return []
    matches = process.extract(str(name), list(choices), limit=limit)
    return [choice for choice, score in matches if score >= SUGGESTION_CUTOFF]


@dataclass(frozen=True)
class RadialProfile:
    """
    A scalar function of r with derivatives up to `max_order`.

    `evaluator(r, order)` returns rho^(order)(r); range and order checks are
    done here so evaluators can stay plain formulas. Closed-form polynomial
    profiles keep their term list in `terms` for serialisation.
    """
    evaluator: object
    max_order: int
    domain: Interval
    label: str = ''
    terms: tuple = None

    def __post_init__(self):
        if self.max_order not in (2, 4):
            raise UnsupportedOrderError(f"profiles carry derivatives to order 2 or 4, got {self.max_order}")

    def evaluate(self, r, order=0):
        if order < 0 or order > self.max_order:
            raise UnsupportedOrderError(
                f"profile {self.label or '<anonymous>'} has derivatives up to order {self.max_order}, asked for {order}"
            )
        if not self.domain.contains(r):
            raise DomainError(f"r={r!r} is outside the profile domain {self.domain}")
        return float(self.evaluator(r, order))

    def __call__(self, r):
        return self.evaluate(r, 0)


def profile_eval(p, r, order=0):
    """Return rho^(order)(r)"""
    return p.evaluate(r, order)


def function_profile(derivatives, domain=POSITIVE_HALF_LINE, label=''):
    """Profile from a list of callables rho, rho', ... (length 3 or 5)"""
    derivatives = tuple(derivatives)
    return RadialProfile(
        evaluator=lambda r, order: derivatives[order](r),
        max_order=len(derivatives) - 1,
        domain=domain,
        label=label,
    )


def _falling_factorial(p, n):
    value = 1.0
    for j in range(n):
        value *= (p - j)
    return value


def _falling_factorial_dp(p, n):
    """d/dp of p (p-1) ... (p-n+1)"""
    total = 0.0
    for j in range(n):
        product = 1.0
        for i in range(n):
            if i != j:
                product *= (p - i)
        total += product
    return total


def _term_derivative(coefficient, exponent, log_flag, r, order):
    power = r ** (exponent - order)
    if not log_flag:
        return coefficient * _falling_factorial(exponent, order) * power
    # r^p ln r = d/dp r^p, so its n-th r-derivative is d/dp [(p)_n r^(p-n)]
    return coefficient * power * (
        _falling_factorial(exponent, order) * math.log(r) + _falling_factorial_dp(exponent, order)
    )


def make_polynomial_profile(terms, label=''):
    """
    Profile sum(c * r^p * (ln r if log_flag)) on (0, inf), analytic to order 4.

    Args:
        terms: iterable of (coefficient, exponent, log_flag)
    """
    normalised = tuple((float(c), float(p), bool(flag)) for c, p, flag in terms)
    if not normalised:
        raise EmptyProfileError("a polynomial profile needs at least one term")

    def evaluator(r, order):
        return sum(_term_derivative(c, p, flag, r, order) for c, p, flag in normalised)

    return RadialProfile(
        evaluator=evaluator,
        max_order=4,
        domain=POSITIVE_HALF_LINE,
        label=label or _describe_terms(normalised),
        terms=normalised,
    )


def _describe_terms(terms):
    pieces = []
    for c, p, flag in terms:
        piece = f"{c:g}*r^{p:g}"
        if flag:
            piece += "*ln(r)"
        pieces.append(piece)
    return " + ".join(pieces)


def perturb_profile(p, v, t):
    """Profile r -> p(r) + t v(r) on the common domain"""
    def evaluator(r, order):
        return p.evaluator(r, order) + t * v.evaluator(r, order)

    return RadialProfile(
        evaluator=evaluator,
        max_order=min(p.max_order, v.max_order),
        domain=p.domain.intersect(v.domain),
        label=f"({p.label}) + {t!r}*({v.label})",
    )


def sample_grid(a, b, n):
    """Uniform grid of n radii on [a, b]"""
    return [float(x) for x in np.linspace(a, b, n)]


@dataclass(frozen=True)
class EigenmapDescriptor:
    """
    An eigenmap S^{m-1} -> S^{n-1}, stored only through its energy density 2k.
    The map itself is never evaluated pointwise.
    """
    name: str
    domain_sphere_dim: int
    target_sphere_dim: int
    energy_density: float

    def __post_init__(self):
        if not self.energy_density > 0:
            raise DomainError(f"eigenmap energy density must be positive, got {self.energy_density!r}")

    @property
    def is_identity(self):
        return (self.name.startswith('identity')
                and self.domain_sphere_dim == self.target_sphere_dim
                and self.energy_density == self.domain_sphere_dim)


_CATALOG_PATTERN = re.compile(r'^\s*([a-z_]+)\s*(?:\(\s*(\d+)\s*\))?\s*$')


def eigenmap_catalog(name):
    """
    Resolve one of identity(d), power(d) (z -> z^d on S^1) or hopf.

    identity(d) has 2k = d, power(d) has 2k = d^2, the Hopf fibration
    S^3 -> S^2 has 2k = 8.
    """
    match = _CATALOG_PATTERN.match(str(name).lower())
    family = match.group(1) if match else None
    if family not in EIGENMAP_FAMILIES:
        raise CatalogError(f"catalog miss: unknown eigenmap {name!r}",
                           suggestions=suggest(family or name, EIGENMAP_FAMILIES))
    degree = int(match.group(2)) if match.group(2) is not None else None

    if family == 'hopf':
        if degree is not None:
            raise CatalogError(f"catalog miss: hopf takes no parameter, got {name!r}", suggestions=['hopf'])
        return EigenmapDescriptor('hopf', 3, 2, 8.0)
    if degree is None or degree < 1:
        raise CatalogError(f"catalog miss: {family} needs a positive integer parameter, e.g. {family}(3)",
                           suggestions=[f"{family}(1)"])
    if family == 'identity':
        return EigenmapDescriptor(f"identity({degree})", degree, degree, float(degree))
    return EigenmapDescriptor(f"power({degree})", 1, 1, float(degree * degree))


@dataclass(frozen=True)
class EquivariantMap:
    """
    phi(r, theta) = (rho(r), eigenmap(theta)) between the domain model
    (warping sigma, dimension m) and the target model (warping lambda,
    dimension n).
    """
    domain: ModelSpace
    target: ModelSpace
    eigenmap: EigenmapDescriptor
    profile: RadialProfile
    name: str = field(default='', compare=False)

    def __post_init__(self):
        if self.eigenmap.domain_sphere_dim != self.domain.dimension - 1:
            raise DomainError(
                f"eigenmap {self.eigenmap.name} starts on S^{self.eigenmap.domain_sphere_dim}, "
                f"domain model needs S^{self.domain.dimension - 1}"
            )
        if self.eigenmap.target_sphere_dim != self.target.dimension - 1:
            raise DomainError(
                f"eigenmap {self.eigenmap.name} lands on S^{self.eigenmap.target_sphere_dim}, "
                f"target model needs S^{self.target.dimension - 1}"
            )

    @property
    def m(self):
        return self.domain.dimension

    @property
    def energy_density(self):
        return self.eigenmap.energy_density

    @property
    def is_rotationally_symmetric(self):
        return self.eigenmap.is_identity and self.energy_density == self.m - 1

    def check_range(self, a, b, n=50):
        """Raise RangeError unless rho([a, b]) lies in the target warping domain"""
        for r in sample_grid(a, b, n):
            value = self.profile.evaluate(r, 0)
            if not self.target.warping.target_domain.contains(value):
                raise RangeError(
                    f"rho({r!r})={value!r} is outside the target domain {self.target.warping.target_domain}"
                )


@dataclass(frozen=True)
class LatitudeMap:
    """
    theta -> (rho0, eigenmap(theta)) from the round unit sphere S^d into
    the target model; the image sits on the latitude sphere at radius rho0.
    """
    domain_sphere_dim: int
    eigenmap: EigenmapDescriptor
    rho0: float
    target: ModelSpace
    name: str = field(default='', compare=False)

    def __post_init__(self):
        if self.eigenmap.domain_sphere_dim != self.domain_sphere_dim:
            raise DomainError(
                f"eigenmap {self.eigenmap.name} starts on S^{self.eigenmap.domain_sphere_dim}, "
                f"latitude domain is S^{self.domain_sphere_dim}"
            )
        if self.eigenmap.target_sphere_dim != self.target.dimension - 1:
            raise DomainError(
                f"eigenmap {self.eigenmap.name} lands on S^{self.eigenmap.target_sphere_dim}, "
                f"target model needs S^{self.target.dimension - 1}"
            )
        interval = self.target.warping.domain
        if not (interval.lower < self.rho0 < interval.upper):
            raise DomainError(f"rho0={self.rho0!r} must lie inside the target domain {interval}")

    @property
    def energy_density(self):
        return self.eigenmap.energy_density
