"""
Closed-form radial families on Euclidean domains, the Almansi splitting,
the three conformal biharmonic maps of 4-dimensional models and the tools
that recover a space-form target from a conformal factor.
"""
import math
from dataclasses import dataclass

import numpy as np

from src.errors import (
    CatalogError,
    DegenerateFamilyError,
    DomainError,
    NotApplicableError,
    NotConformalError,
    UnsupportedDimensionError,
)
from src.geometry import (
    Interval,
    ModelSpace,
    custom_warping,
    flat_warping,
    hyperbolic_warping,
    spherical_warping,
    target_scalar_curvature,
)
from src.profiles import (
    EquivariantMap,
    RadialProfile,
    eigenmap_catalog,
    function_profile,
    make_polynomial_profile,
    sample_grid,
    suggest,
)
from src.tension import conformality_residual

CLASSIFICATION_MAPS = ('inversion', 'stereographic', 'hyperbolic')

DEGENERACY_TOLERANCE = 1e-9
CONFORMAL_TOLERANCE = 1e-8


@dataclass(frozen=True)
class ExponentPair:
    """Roots of p^2 + (m-2) p - 2k = 0, k_plus >= k_minus"""
    k_plus: float
    k_minus: float


@dataclass(frozen=True)
class FamilyCoefficients:
    c1: float = 0.0
    c2: float = 0.0
    c3: float = 0.0
    c4: float = 0.0

    def __iter__(self):
        return iter((self.c1, self.c2, self.c3, self.c4))


def _check_family_args(m, energy_density):
    if int(m) != m or m < 2:
        raise DomainError(f"m must be an integer >= 2, got {m!r}")
    if not energy_density > 0:
        raise DomainError(f"energy density 2k must be positive, got {energy_density!r}")


def euclidean_exponents(m, energy_density):
    """Exponents p of the harmonic radial solutions r^p on R^m for eigenmap energy density 2k"""
    _check_family_args(m, energy_density)
    root = math.sqrt((m - 2) ** 2 + 4.0 * energy_density)
    return ExponentPair((-(m - 2) + root) / 2.0, (-(m - 2) - root) / 2.0)


def harmonic_family(m, energy_density, c1, c2):
    """c1 r^k_plus + c2 r^k_minus"""
    pair = euclidean_exponents(m, energy_density)
    return make_polynomial_profile(
        [(c1, pair.k_plus, False), (c2, pair.k_minus, False)],
        label=f"harmonic family m={m} 2k={energy_density:g}",
    )


def _is_log_branch(m, energy_density):
    return m == 2 and abs(energy_density - 1.0) < DEGENERACY_TOLERANCE


def _particular_denominators(m, pair):
    plus = 2.0 * (m + 2.0 * pair.k_plus)
    minus = 2.0 * (m + 2.0 * pair.k_minus)
    for name, value in (('m + 2 k_plus', plus / 2.0), ('m + 2 k_minus', minus / 2.0)):
        if abs(value) < DEGENERACY_TOLERANCE:
            raise DegenerateFamilyError(
                f"{name} vanishes for m={m}; only the m=2, 2k=1 logarithmic branch is supported"
            )
    return plus, minus


def biharmonic_family(m, energy_density, coeffs):
    """
    The four-parameter biharmonic family on R^m:
    c1/(2(m+2k+)) r^(k+ + 2) + c2/(2(m+2k-)) r^(k- + 2) + c3 r^k+ + c4 r^k-,
    or c1 r^3 + c2 r ln r + c3 r + c4/r when m=2 and 2k=1.
    """
    pair = euclidean_exponents(m, energy_density)
    c1, c2, c3, c4 = coeffs
    label = f"biharmonic family m={m} 2k={energy_density:g}"
    if _is_log_branch(m, energy_density):
        return make_polynomial_profile(
            [(c1, 3.0, False), (c2, 1.0, True), (c3, 1.0, False), (c4, -1.0, False)],
            label=label,
        )
    plus, minus = _particular_denominators(m, pair)
    return make_polynomial_profile(
        [
            (c1 / plus, pair.k_plus + 2.0, False),
            (c2 / minus, pair.k_minus + 2.0, False),
            (c3, pair.k_plus, False),
            (c4, pair.k_minus, False),
        ],
        label=label,
    )


def almansi_decompose(m, energy_density, coeffs):
    """
    Split a biharmonic family member as rho = r^2 rho1 + rho2 with rho1 and
    rho2 both harmonic. Returns (rho1, rho2).
    """
    if m == 2:
        raise NotApplicableError("the m=2 family contains r ln r and has no Almansi splitting")
    pair = euclidean_exponents(m, energy_density)
    plus, minus = _particular_denominators(m, pair)
    c1, c2, c3, c4 = coeffs
    rho1 = make_polynomial_profile(
        [(c1 / plus, pair.k_plus, False), (c2 / minus, pair.k_minus, False)],
        label="almansi rho1",
    )
    rho2 = make_polynomial_profile(
        [(c3, pair.k_plus, False), (c4, pair.k_minus, False)],
        label="almansi rho2",
    )
    return rho1, rho2


def regular_pole_family(C1, C2):
    """C1 r + C2 r^3: the members of the m=4 identity family with rho(0) = 0"""
    return make_polynomial_profile([(C1, 1.0, False), (C2, 3.0, False)], label=f"{C1:g}*r + {C2:g}*r^3")


def _stereographic_profile():
    return function_profile(
        [
            lambda r: 2.0 * math.atan(r),
            lambda r: 2.0 / (1.0 + r * r),
            lambda r: -4.0 * r / (1.0 + r * r) ** 2,
            lambda r: (12.0 * r * r - 4.0) / (1.0 + r * r) ** 3,
            lambda r: 48.0 * r * (1.0 - r * r) / (1.0 + r * r) ** 4,
        ],
        domain=Interval(0.0, math.inf, True, False),
        label="2 arctan r",
    )


def _hyperbolic_profile():
    return function_profile(
        [
            lambda r: 2.0 * math.atanh(r),
            lambda r: 2.0 / (1.0 - r * r),
            lambda r: 4.0 * r / (1.0 - r * r) ** 2,
            lambda r: (4.0 + 12.0 * r * r) / (1.0 - r * r) ** 3,
            lambda r: (48.0 * r + 48.0 * r ** 3) / (1.0 - r * r) ** 4,
        ],
        domain=Interval(0.0, 1.0, True, False),
        label="2 artanh r",
    )


def classification_map(which):
    """
    One of the three conformal biharmonic maps out of R^4:
    the inversion (flat target), the inverse stereographic projection
    (round S^4) and 2 artanh r on the unit ball (hyperbolic H^4).
    """
    if which not in CLASSIFICATION_MAPS:
        raise CatalogError(f"catalog miss: unknown classification map {which!r}",
                           suggestions=suggest(which, CLASSIFICATION_MAPS))
    domain = ModelSpace(4, flat_warping())
    eigenmap = eigenmap_catalog('identity(3)')
    if which == 'inversion':
        target, profile = ModelSpace(4, flat_warping()), make_polynomial_profile([(1.0, -1.0, False)], label="1/r")
    elif which == 'stereographic':
        target, profile = ModelSpace(4, spherical_warping()), _stereographic_profile()
    else:
        target, profile = ModelSpace(4, hyperbolic_warping()), _hyperbolic_profile()
    return EquivariantMap(domain, target, eigenmap, profile, name=which)


def conformal_change_of_variable(c, t):
    """Radius r(t) that turns the conformality condition into an autonomous ODE"""
    if c == 0:
        return math.exp(t)
    if c == 1:
        return 2.0 * math.atan(math.exp(t))
    if c == -1:
        if t >= 0:
            raise DomainError(f"c=-1 needs t < 0 so that e^t < 1, got t={t!r}")
        return 2.0 * math.atanh(math.exp(t))
    raise DomainError(f"c must be -1, 0 or 1, got {c!r}")


@dataclass(frozen=True)
class ConformalFactorReport:
    """Constancy of A along the grid and the residual of Lap u - 3c u = A u^3"""
    A_mean: float
    A_spread: float
    residual_sup: float
    samples: tuple

    def to_dict(self):
        return {'A_mean': self.A_mean, 'A_spread': self.A_spread, 'residual_sup': self.residual_sup}


def _conformal_factor(map, r):
    """u, u' and Lap u for u = lambda(rho)/sigma"""
    sigma_w, lambda_w, p = map.domain.warping, map.target.warping, map.profile
    sigma, s1, s2 = (sigma_w.evaluate(r, k) for k in range(3))
    rho, rho1, rho2 = (p.evaluate(r, k) for k in range(3))
    lam, lam1, lam2 = (lambda_w.evaluate_target(rho, k) for k in range(3))
    L, L1, L2 = lam, lam1 * rho1, lam2 * rho1 * rho1 + lam1 * rho2

    u = L / sigma
    u1 = L1 / sigma - L * s1 / sigma ** 2
    u2 = L2 / sigma - 2.0 * L1 * s1 / sigma ** 2 - L * s2 / sigma ** 2 + 2.0 * L * s1 * s1 / sigma ** 3
    return u, u2 + (map.m - 1) * (s1 / sigma) * u1, rho


def conformal_factor_residual(map, c, a, b, n=50, tolerance=CONFORMAL_TOLERANCE):
    """
    For a conformal map between 4-dimensional models with domain curvature c,
    sample A(r) = -(6c/u^2 + Scal_N(rho))/6 on [a, b] and check
    Lap u - 3c u = A u^3 with the mean A.
    """
    if map.m != 4 or map.target.dimension != 4:
        raise UnsupportedDimensionError("the conformal factor test is only available in dimension 4")
    grid = sample_grid(a, b, n)
    worst = max(abs(conformality_residual(map, r)) for r in grid)
    if worst > tolerance:
        raise NotConformalError(f"map {map.name or map.profile.label} is not conformal: residual {worst:.3e}")

    samples = []
    for r in grid:
        u, lap_u, rho = _conformal_factor(map, r)
        A = -(6.0 * c / (u * u) + target_scalar_curvature(map.target, rho)) / 6.0
        samples.append((u, lap_u, A))
    values = np.array([A for _, _, A in samples])
    A_mean = float(values.mean())
    residual_sup = max(abs(lap_u - 3.0 * c * u - A_mean * u ** 3) for u, lap_u, _ in samples)
    return ConformalFactorReport(
        A_mean=A_mean,
        A_spread=float(values.max() - values.min()),
        residual_sup=float(residual_sup),
        samples=tuple(A for _, _, A in samples),
    )


def classify_conformal_target(A, c, C=None):
    """
    Target warping forced by a conformal biharmonic map with constant A:
    sqrt(1+c) rho for A = 0, C sinh(a rho) for A > 0, C sin(a rho) for
    A < 0, with a = sqrt(2|A|)/2. Without C the amplitude solving
    (lambda^2)'' - 2A lambda^2 = 2(1+c) is used.
    """
    if A == 0:
        if c <= -1:
            raise DegenerateFamilyError(f"A=0 needs c > -1, got c={c!r}")
        s = math.sqrt(1.0 + c)
        return custom_warping((lambda x: s * x, lambda x: s, lambda x: 0.0, lambda x: 0.0), check_pole=False)

    a = math.sqrt(2.0 * abs(A)) / 2.0
    if C is None:
        if c <= -1:
            raise DegenerateFamilyError(f"no positive amplitude solves the conformal equation for c={c!r}")
        C = math.sqrt(2.0 * (1.0 + c) / abs(A))
    if not C > 0:
        raise DomainError(f"amplitude C must be positive, got {C!r}")

    if A > 0:
        return custom_warping(
            (
                lambda x: C * math.sinh(a * x),
                lambda x: C * a * math.cosh(a * x),
                lambda x: C * a * a * math.sinh(a * x),
                lambda x: C * a ** 3 * math.cosh(a * x),
            ),
            check_pole=False,
        )
    return custom_warping(
        (
            lambda x: C * math.sin(a * x),
            lambda x: C * a * math.cos(a * x),
            lambda x: -C * a * a * math.sin(a * x),
            lambda x: -C * a ** 3 * math.cos(a * x),
        ),
        upper=math.pi / a,
        upper_closed=True,
        check_pole=False,
    )


def conformal_square_family(A, c, constants=(0.0, 0.0)):
    """
    General solution y = lambda^2 of y'' - 2A y = 2(1+c) as a profile in rho,
    before lambda(0) = 0 is imposed. `constants` are the two free constants
    (K1, K2) of the homogeneous part.
    """
    K1, K2 = constants
    domain = Interval(0.0, math.inf, True, False)
    if A == 0:
        s = 1.0 + c
        derivatives = [
            lambda x: s * x * x + K1 * x + K2,
            lambda x: 2.0 * s * x + K1,
            lambda x: 2.0 * s,
            lambda x: 0.0,
            lambda x: 0.0,
        ]
    elif A > 0:
        b = math.sqrt(2.0 * A)
        shift = (1.0 + c) / A

        def nth(k):
            return lambda x: (b ** k * (K1 * math.exp(b * x) + (-1) ** k * K2 * math.exp(-b * x))
                              - (shift if k == 0 else 0.0))
        derivatives = [nth(k) for k in range(5)]
    else:
        b = math.sqrt(-2.0 * A)
        shift = (1.0 + c) / -A

        def nth(k):
            # d^k/dx^k of K1 cos(bx) + K2 sin(bx) rotates the phase by k*pi/2
            return lambda x: b ** k * (K1 * math.cos(b * x + k * math.pi / 2.0)
                                       + K2 * math.sin(b * x + k * math.pi / 2.0)) + (shift if k == 0 else 0.0)
        derivatives = [nth(k) for k in range(5)]
    return RadialProfile(
        evaluator=lambda x, order: derivatives[order](x),
        max_order=4,
        domain=domain,
        label=f"lambda^2 family A={A:g} c={c:g}",
    )


def conformal_ode_residual(warping, A, c, rho):
    """(lambda^2)'' - 2A lambda^2 - 2(1+c) at rho"""
    lam, lam1, lam2 = (warping.evaluate(rho, k) for k in range(3))
    return 2.0 * (lam1 * lam1 + lam * lam2) - 2.0 * A * lam * lam - 2.0 * (1.0 + c)


def rotationally_symmetric_cartesian(profile, x):
    """phi(x) = rho(|x|) x/|x| for a rotationally symmetric map"""
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r == 0.0:
        raise DomainError("the Cartesian form is undefined at the origin")
    return profile.evaluate(r, 0) * x / r
