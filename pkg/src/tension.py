"""
Tension field F, bitension residual (both forms), radial Laplacian,
conformality residual and residual reports for equivariant and latitude maps.

For an equivariant map phi(r, theta) = (rho(r), eigenmap(theta)) the tension
is tau(phi) = F d/drho with

    F = rho'' + (m-1)(sigma'/sigma) rho' - 2k (lambda lambda')(rho) / sigma^2

and phi is biharmonic iff

    F'' + (m-1)(sigma'/sigma) F' - 2k (lambda lambda')'(rho) / sigma^2 F = 0.
"""
import math
from dataclasses import dataclass

from src.errors import (
    BiharmonicError,
    DomainError,
    NotApplicableError,
    RangeError,
    SingularityError,
    StencilError,
)
from src.geometry import is_positive_number
from src.profiles import RadialProfile, sample_grid

HARMONIC = 'harmonic'
PROPER_BIHARMONIC = 'proper_biharmonic'
NEITHER = 'neither'

MIN_REPORT_POINTS = 8


@dataclass(frozen=True)
class Tolerances:
    """Verdict thresholds; tol_index=None means 1e-6 * max |matrix entry|"""
    tau_h: float = 1e-8
    tau_b: float = 1e-6
    tol_index: float = None

    def __post_init__(self):
        for name in ('tau_h', 'tau_b', 'tol_index'):
            value = getattr(self, name)
            if value is None and name == 'tol_index':
                continue
            if not is_positive_number(value):
                raise DomainError(f"tolerance {name} must be a positive finite number, got {value!r}")


def domain_terms(domain, r):
    """sigma and its first three derivatives at r"""
    sigma = domain.warping.evaluate(r, 0)
    if sigma == 0.0:
        raise SingularityError(f"domain warping vanishes at r={r!r} (pole of the model)")
    return (sigma, domain.warping.evaluate(r, 1), domain.warping.evaluate(r, 2), domain.warping.evaluate(r, 3))


def target_terms(target, rho, r=None):
    """(lambda lambda')(rho) and its first two rho-derivatives"""
    warping = target.warping
    if not warping.target_domain.contains(rho):
        where = f" at r={r!r}" if r is not None else ""
        raise RangeError(f"rho={rho!r}{where} is outside the target domain {warping.target_domain}")
    lam, lam1, lam2, lam3 = (warping.evaluate_target(rho, k) for k in range(4))
    return (lam * lam1, lam1 * lam1 + lam * lam2, 3.0 * lam1 * lam2 + lam * lam3)


def _fd_step(r):
    return max(1e-4, 1e-4 * abs(r))


def _central_differences(func, r, domain):
    """Five-point first and second derivatives of func at r"""
    h = _fd_step(r)
    stencil = [r - 2 * h, r - h, r + h, r + 2 * h]
    for x in stencil:
        if not domain.contains(x):
            raise StencilError(f"finite-difference stencil around r={r!r} leaves the domain {domain}")
    try:
        fm2, fm1, fp1, fp2 = (func(x) for x in stencil)
        f0 = func(r)
    except (DomainError, SingularityError) as exc:
        raise StencilError(f"finite-difference stencil around r={r!r} failed: {exc}") from exc
    first = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h)
    second = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h)
    return f0, first, second


def radial_laplacian(domain, alpha, r):
    """Laplacian of a radial function: alpha'' + (m-1)(sigma'/sigma) alpha'"""
    sigma, s1, _, _ = domain_terms(domain, r)
    return alpha.evaluate(r, 2) + (domain.dimension - 1) * (s1 / sigma) * alpha.evaluate(r, 1)


def tension_F(map, r):
    """The radial tension component F(r); tau(phi) = F d/drho"""
    sigma, s1, _, _ = domain_terms(map.domain, r)
    rho = map.profile.evaluate(r, 0)
    g, _, _ = target_terms(map.target, rho, r)
    return (map.profile.evaluate(r, 2)
            + (map.m - 1) * (s1 / sigma) * map.profile.evaluate(r, 1)
            - map.energy_density * g / (sigma * sigma))


@dataclass(frozen=True)
class RadialFrame:
    """Everything the residuals, the Jacobi operator and the Hessian need at one radius"""
    r: float
    sigma: float
    q: float       # (m-1) sigma'/sigma
    w: float       # 1/sigma^2
    rho: float
    rho1: float
    rho2: float
    g: float       # (lambda lambda')(rho)
    g1: float      # (lambda lambda')'(rho)
    F: float
    F1: float
    F2: float


def _analytic_frame(map, r):
    sigma, s1, s2, s3 = domain_terms(map.domain, r)
    p = map.profile
    rho0, rho1, rho2, rho3, rho4 = (p.evaluate(r, k) for k in range(5))
    g, g1, g2 = target_terms(map.target, rho0, r)
    c = map.m - 1
    e = map.energy_density

    q = c * s1 / sigma
    q1 = c * (s2 / sigma - s1 * s1 / sigma ** 2)
    q2 = c * (s3 / sigma - 3.0 * s1 * s2 / sigma ** 2 + 2.0 * s1 ** 3 / sigma ** 3)
    w = 1.0 / sigma ** 2
    w1 = -2.0 * s1 / sigma ** 3
    w2 = -2.0 * s2 / sigma ** 3 + 6.0 * s1 * s1 / sigma ** 4
    G1 = g1 * rho1
    G2 = g2 * rho1 * rho1 + g1 * rho2

    F = rho2 + q * rho1 - e * w * g
    F1 = rho3 + q1 * rho1 + q * rho2 - e * (w1 * g + w * G1)
    F2 = rho4 + q2 * rho1 + 2.0 * q1 * rho2 + q * rho3 - e * (w2 * g + 2.0 * w1 * G1 + w * G2)
    return RadialFrame(r, sigma, q, w, rho0, rho1, rho2, g, g1, F, F1, F2)


def _numeric_frame(map, r):
    sigma, s1, _, _ = domain_terms(map.domain, r)
    rho0, rho1, rho2 = (map.profile.evaluate(r, k) for k in range(3))
    g, g1, _ = target_terms(map.target, rho0, r)
    F, F1, F2 = _central_differences(lambda x: tension_F(map, x), r, map.profile.domain)
    return RadialFrame(r, sigma, (map.m - 1) * s1 / sigma, 1.0 / sigma ** 2,
                       rho0, rho1, rho2, g, g1, F, F1, F2)


def radial_frame(map, r):
    """
    Local quantities at r. F' and F'' come from the chain rule when the
    profile is analytic to order 4, otherwise from central differences of F.
    """
    if map.profile.max_order >= 4:
        return _analytic_frame(map, r)
    return _numeric_frame(map, r)


def bitension_residual(map, r):
    """F'' + (m-1)(sigma'/sigma) F' - 2k (lambda lambda')'(rho)/sigma^2 F"""
    f = radial_frame(map, r)
    return f.F2 + f.q * f.F1 - map.energy_density * f.w * f.g1 * f.F


def bitension_residual_alt(map, r):
    """
    The same residual written as
    Lap^2 rho - 2k Lap(g/sigma^2) - 2k g'/sigma^2 (Lap rho - 2k g/sigma^2),
    with g = lambda lambda' evaluated along rho.
    """
    e = map.energy_density
    p = map.profile
    if p.max_order >= 4:
        sigma, s1, s2, s3 = domain_terms(map.domain, r)
        rho0, rho1, rho2, rho3, rho4 = (p.evaluate(r, k) for k in range(5))
        g, g1, g2 = target_terms(map.target, rho0, r)
        c = map.m - 1
        q = c * s1 / sigma
        q1 = c * (s2 / sigma - s1 * s1 / sigma ** 2)
        q2 = c * (s3 / sigma - 3.0 * s1 * s2 / sigma ** 2 + 2.0 * s1 ** 3 / sigma ** 3)
        w = 1.0 / sigma ** 2
        w1 = -2.0 * s1 / sigma ** 3
        w2 = -2.0 * s2 / sigma ** 3 + 6.0 * s1 * s1 / sigma ** 4
        lap = rho2 + q * rho1
        lap1 = rho3 + q1 * rho1 + q * rho2
        lap2 = rho4 + q2 * rho1 + 2.0 * q1 * rho2 + q * rho3
        h0 = w * g
        h1 = w1 * g + w * g1 * rho1
        h2 = w2 * g + 2.0 * w1 * g1 * rho1 + w * (g2 * rho1 * rho1 + g1 * rho2)
    else:
        sigma, s1, _, _ = domain_terms(map.domain, r)
        q = (map.m - 1) * s1 / sigma
        w = 1.0 / sigma ** 2
        _, g1, _ = target_terms(map.target, p.evaluate(r, 0), r)
        lap, lap1, lap2 = _central_differences(lambda x: radial_laplacian(map.domain, p, x), r, p.domain)
        h0, h1, h2 = _central_differences(
            lambda x: target_terms(map.target, p.evaluate(x, 0), x)[0] / map.domain.warping.evaluate(x, 0) ** 2,
            r, p.domain,
        )
    bilaplacian = lap2 + q * lap1
    laplacian_of_h = h2 + q * h1
    return bilaplacian - e * laplacian_of_h - e * w * g1 * (lap - e * h0)


def tension_profile(map):
    """The tension F of an equivariant map as a profile of order 2"""
    def evaluator(r, order):
        frame = radial_frame(map, r)
        return (frame.F, frame.F1, frame.F2)[order]

    return RadialProfile(evaluator=evaluator, max_order=2, domain=map.profile.domain,
                         label=f"tension of {map.name or map.profile.label}")


def conformality_residual(map, r):
    """|rho'(r)| sigma(r) - |lambda(rho(r))|; zero iff phi is conformal at r"""
    if not map.is_rotationally_symmetric:
        raise NotApplicableError(
            f"conformality is only defined for rotationally symmetric maps, eigenmap is {map.eigenmap.name}"
        )
    sigma = map.domain.warping.evaluate(r, 0)
    rho = map.profile.evaluate(r, 0)
    lam = map.target.warping
    if not lam.target_domain.contains(rho):
        raise RangeError(f"rho={rho!r} at r={r!r} is outside the target domain {lam.target_domain}")
    return abs(map.profile.evaluate(r, 1)) * sigma - abs(lam.evaluate_target(rho, 0))


def latitude_residuals(map):
    """
    Constant tension and bitension of a latitude map:
    F = -2k (lambda lambda')(rho0), bitension = -2k (lambda lambda')'(rho0) F.
    """
    g, g1, _ = target_terms(map.target, map.rho0)
    F = -map.energy_density * g
    return F, -map.energy_density * g1 * F


def classify(F_sup, bitension_sup, tolerances):
    if F_sup <= tolerances.tau_h:
        return HARMONIC
    if bitension_sup <= tolerances.tau_b:
        return PROPER_BIHARMONIC
    return NEITHER


def _rms(values):
    return math.sqrt(sum(v * v for v in values) / len(values)) if values else 0.0


@dataclass(frozen=True)
class ResidualReport:
    """Residuals of one map on a uniform grid, with their norms and the verdict"""
    grid: tuple
    tension: tuple
    bitension: tuple
    conformality: tuple
    F_sup: float
    F_l2: float
    bitension_sup: float
    bitension_l2: float
    conformal_sup: float
    verdict: str
    tolerances: Tolerances

    def to_dict(self):
        return {
            'grid_n': len(self.grid),
            'interval': {'a': self.grid[0], 'b': self.grid[-1]},
            'F_sup': self.F_sup,
            'F_l2': self.F_l2,
            'bitension_sup': self.bitension_sup,
            'bitension_l2': self.bitension_l2,
            'conformal_sup': self.conformal_sup,
            'verdict': self.verdict,
            'tolerances': {'tau_h': self.tolerances.tau_h, 'tau_b': self.tolerances.tau_b},
        }

    def csv_rows(self):
        """Rows (r, F, bitension, conformality); conformality is NaN when not applicable"""
        conformality = self.conformality or (math.nan,) * len(self.grid)
        return [list(row) for row in zip(self.grid, self.tension, self.bitension, conformality)]


def residual_report(map, a, b, n, tolerances=None):
    """
    Evaluate F, the bitension and (for rotationally symmetric maps) the
    conformality residual on an n-point uniform grid of [a, b].
    """
    tolerances = tolerances or Tolerances()
    if n < MIN_REPORT_POINTS:
        raise DomainError(f"residual reports need at least {MIN_REPORT_POINTS} grid points, got {n}")
    if not a < b:
        raise DomainError(f"empty interval [{a!r}, {b!r}]")

    grid = sample_grid(a, b, n)
    with_conformality = map.is_rotationally_symmetric
    tension, bitension, conformality = [], [], []
    for r in grid:
        try:
            frame = radial_frame(map, r)
            tension.append(frame.F)
            bitension.append(frame.F2 + frame.q * frame.F1 - map.energy_density * frame.w * frame.g1 * frame.F)
            if with_conformality:
                conformality.append(conformality_residual(map, r))
        except BiharmonicError as exc:
            exc.args = (f"at r={r!r}: {exc}",) + exc.args[1:]
            exc.radius = r
            raise

    F_abs = [abs(v) for v in tension]
    B_abs = [abs(v) for v in bitension]
    F_sup = max(F_abs)
    bitension_sup = max(B_abs)
    return ResidualReport(
        grid=tuple(grid),
        tension=tuple(tension),
        bitension=tuple(bitension),
        conformality=tuple(conformality) if with_conformality else None,
        F_sup=F_sup,
        F_l2=_rms(tension),
        bitension_sup=bitension_sup,
        bitension_l2=_rms(bitension),
        conformal_sup=max(abs(v) for v in conformality) if with_conformality else None,
        verdict=classify(F_sup, bitension_sup, tolerances),
        tolerances=tolerances,
    )
