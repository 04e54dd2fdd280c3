"""
Energies, the radial Jacobi operator and the second variation of the
bienergy at biharmonic maps into space forms.

For a radial variation V = v(r) d/drho of an equivariant map into a target
of constant curvature c the second variation reduces to

    Q(v) = Vol(S^{m-1}) * int { (Lv)^2 - c [ 2 v^2 F^2 - 2 v^2 div - 2 v F T + 2 v rho' (vF)' ] } sigma^{m-1} dr

with Lv = v'' + (m-1)(sigma'/sigma) v' - 2k (lambda lambda')'(rho)/sigma^2 v,
div = (rho' F)' + (m-1)(sigma'/sigma) rho' F and T = rho' v' + 2k v lambda lambda'(rho)/sigma^2.
The derivation is in docs/hessian_reduction.md.
"""
import math
from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial import Polynomial

from src.errors import (
    DomainError,
    NotApplicableError,
    PreconditionError,
    SpectralError,
)
from src.geometry import (
    Interval,
    adaptive_quadrature,
    quadrature,
    quadrature_nodes,
    space_form_curvature,
    sphere_volume,
)
from src.profiles import EquivariantMap, LatitudeMap, RadialProfile, perturb_profile, sample_grid
from src.tension import (
    NEITHER,
    Tolerances,
    domain_terms,
    latitude_residuals,
    radial_frame,
    residual_report,
    target_terms,
    tension_F,
)

DEFAULT_PANELS = 128
SUPPORT_TOLERANCE = 1e-12
PRECONDITION_GRID = 64
MIN_INDEX_NODES = 16
MAX_SWEEPS = 100
# beyond this |theta| the rotation angle is taken as 1/(2 theta)
THETA_LIMIT = 1e150
SYMMETRY_TOLERANCE = 1e-12
SMALLEST_REPORTED = 10
TAU_SPREAD_TOLERANCE = 1e-8

TERM_NAMES = ('jacobi', 'tension_sq', 'divergence', 'trace', 'gradient')

INDEX_LABEL = 'index over radial variations'


@dataclass(frozen=True)
class VariationField:
    """
    A radial variation v(r) d/drho, or a constant variation of a latitude
    map (`constant` set, `profile` None).
    """
    profile: RadialProfile = None
    constant: float = None
    support: Interval = None

    @classmethod
    def radial(cls, profile, support=None):
        if profile.max_order < 2:
            raise DomainError("variation fields need derivatives up to order 2")
        return cls(profile=profile, support=support or profile.domain)

    @classmethod
    def uniform(cls, value):
        return cls(constant=float(value))

    @property
    def is_constant(self):
        return self.profile is None

    def evaluate(self, r, order=0):
        if self.is_constant:
            return self.constant if order == 0 else 0.0
        return self.profile.evaluate(r, order)

    def check_support(self, a, b):
        """v and v' must vanish at both ends of [a, b]"""
        if self.is_constant:
            return
        for r in (a, b):
            for order in (0, 1):
                value = self.profile.evaluate(r, order)
                if abs(value) > SUPPORT_TOLERANCE:
                    raise PreconditionError(
                        f"variation is not compactly supported in ({a!r}, {b!r}): "
                        f"v^({order})({r!r}) = {value!r}"
                    )


def polynomial_profile(poly, domain, label=''):
    """Profile backed by a numpy Polynomial, analytic to order 4"""
    derivatives = [poly] + [poly.deriv(k) for k in range(1, 5)]
    return RadialProfile(
        evaluator=lambda r, order: derivatives[order](r),
        max_order=4,
        domain=domain,
        label=label,
    )


def bump_field(a, b, shape=(1.0,)):
    """
    v(r) = (r-a)^2 (b-r)^2 p(r) with p given by its coefficients in r.
    v and v' vanish at a and b.
    """
    if not a < b:
        raise DomainError(f"empty support [{a!r}, {b!r}]")
    poly = Polynomial([a * a, -2.0 * a, 1.0]) * Polynomial([b * b, -2.0 * b, 1.0]) * Polynomial(list(shape))
    support = Interval(a, b, True, True)
    return VariationField.radial(polynomial_profile(poly, support, label=f"bump[{a:g},{b:g}]"), support)


def zero_field(a, b):
    support = Interval(a, b, True, True)
    return VariationField.radial(polynomial_profile(Polynomial([0.0]), support, label="0"), support)


def radial_jacobi(map, v, r):
    """(Lv)(r); the Jacobi operator acts as J(v d/drho) = -(Lv) d/drho"""
    sigma, s1, _, _ = domain_terms(map.domain, r)
    _, g1, _ = target_terms(map.target, map.profile.evaluate(r, 0), r)
    return (v.evaluate(r, 2) + (map.m - 1) * (s1 / sigma) * v.evaluate(r, 1)
            - map.energy_density * g1 * v.evaluate(r, 0) / (sigma * sigma))


def _integrate(f, a, b, panels):
    if panels is None:
        return adaptive_quadrature(f, a, b)
    return quadrature(f, a, b, panels)


def bienergy(map, a=None, b=None, panels=None):
    """
    Half the integral of |tau|^2. For equivariant maps over r in [a, b],
    for latitude maps over the whole round sphere (a and b are ignored).
    Adaptive quadrature unless a fixed panel count is given.
    """
    if isinstance(map, LatitudeMap):
        F, _ = latitude_residuals(map)
        return 0.5 * F * F * sphere_volume(map.domain_sphere_dim)

    m = map.m

    def integrand(r):
        F = tension_F(map, r)
        return F * F * map.domain.warping.evaluate(r, 0) ** (m - 1)

    return 0.5 * sphere_volume(m - 1) * _integrate(integrand, a, b, panels)


def energy(map, a, b, panels=None):
    """Half the integral of (rho'^2 + 2k lambda(rho)^2/sigma^2) sigma^{m-1}, times Vol(S^{m-1})"""
    m = map.m
    e = map.energy_density

    def integrand(r):
        sigma = map.domain.warping.evaluate(r, 0)
        lam = map.target.warping.evaluate_target(map.profile.evaluate(r, 0), 0)
        return (map.profile.evaluate(r, 1) ** 2 + e * lam * lam / (sigma * sigma)) * sigma ** (m - 1)

    return 0.5 * sphere_volume(m - 1) * _integrate(integrand, a, b, panels)


@dataclass(frozen=True)
class HessianReport:
    """Second variation of the bienergy and its five integrals"""
    value: float
    terms: dict
    quadrature_panels: int
    curvature: float

    def to_dict(self):
        return {
            'value': self.value,
            'terms': dict(self.terms),
            'quadrature_panels': self.quadrature_panels,
            'curvature': self.curvature,
        }


def _combine(terms, c):
    return terms['jacobi'] - c * (terms['tension_sq'] - terms['divergence'] - terms['trace'] + terms['gradient'])


def _require_biharmonic(map, a, b, tolerances):
    if isinstance(map, LatitudeMap):
        _, bitension = latitude_residuals(map)
        if abs(bitension) > tolerances.tau_b:
            raise PreconditionError(f"latitude map is not biharmonic: bitension {bitension!r}")
        return
    report = residual_report(map, a, b, PRECONDITION_GRID, tolerances)
    if report.verdict == NEITHER:
        raise PreconditionError(
            f"map {map.name or map.profile.label} is not biharmonic on [{a!r}, {b!r}]: "
            f"bitension sup {report.bitension_sup:.3e}"
        )


def _latitude_terms(map, value):
    e = map.energy_density
    g, g1, _ = target_terms(map.target, map.rho0)
    F = -e * g
    volume = sphere_volume(map.domain_sphere_dim)
    return {
        'jacobi': volume * (e * g1 * value) ** 2,
        'tension_sq': volume * 2.0 * value * value * F * F,
        'divergence': 0.0,
        'trace': volume * 2.0 * value * F * e * value * g,
        'gradient': 0.0,
    }


def _pointwise_terms(map, v, r):
    f = radial_frame(map, r)
    e = map.energy_density
    v0, v1, v2 = v.evaluate(r, 0), v.evaluate(r, 1), v.evaluate(r, 2)
    Lv = v2 + f.q * v1 - e * f.w * f.g1 * v0
    divergence = f.rho2 * f.F + f.rho1 * f.F1 + f.q * f.rho1 * f.F
    trace = f.rho1 * v1 + e * v0 * f.w * f.g
    return (
        Lv * Lv,
        2.0 * v0 * v0 * f.F * f.F,
        2.0 * v0 * v0 * divergence,
        2.0 * v0 * f.F * trace,
        2.0 * v0 * f.rho1 * (v1 * f.F + v0 * f.F1),
    ), f.sigma


def hessian_form(map, v, a=None, b=None, panels=DEFAULT_PANELS, tolerances=None):
    """
    Second variation Q(v) of the bienergy at a biharmonic map into a space
    form, with the five integrals reported separately.

    Raises:
        UnsupportedTargetError: the target is not flat, spherical or hyperbolic
        PreconditionError: the map is not biharmonic or v is not compactly supported
    """
    tolerances = tolerances or Tolerances()
    c = space_form_curvature(map.target.warping)
    _require_biharmonic(map, a, b, tolerances)

    if isinstance(map, LatitudeMap):
        if not v.is_constant:
            raise NotApplicableError("latitude maps take a constant variation")
        terms = _latitude_terms(map, v.constant)
        return HessianReport(_combine(terms, c), terms, 0, c)

    v.check_support(a, b)
    nodes, weights = quadrature_nodes(a, b, panels)
    sums = np.zeros(len(TERM_NAMES))
    for r, weight in zip(nodes, weights):
        values, sigma = _pointwise_terms(map, v, float(r))
        sums += weight * np.array(values) * sigma ** (map.m - 1)
    terms = dict(zip(TERM_NAMES, (float(x) * sphere_volume(map.m - 1) for x in sums)))
    return HessianReport(_combine(terms, c), terms, panels, c)


def hessian_fd_oracle(map, v, a=None, b=None, t_step=1e-3, panels=DEFAULT_PANELS):
    """
    d^2/dt^2 E2(rho + t v) at t = 0 from central second differences at t
    and t/2, combined by one Richardson step.
    """
    if not 1e-4 <= t_step <= 1e-2:
        raise DomainError(f"t_step must lie in [1e-4, 1e-2], got {t_step!r}")

    if isinstance(map, LatitudeMap):
        def bienergy_at(t):
            return bienergy(replace(map, rho0=map.rho0 + t * v.constant))
    else:
        v.check_support(a, b)

        def bienergy_at(t):
            moved = EquivariantMap(map.domain, map.target, map.eigenmap, perturb_profile(map.profile, v.profile, t))
            return bienergy(moved, a, b, panels)

    base = bienergy_at(0.0)

    def second_difference(t):
        return (bienergy_at(t) - 2.0 * base + bienergy_at(-t)) / (t * t)

    coarse = second_difference(t_step)
    fine = second_difference(t_step / 2.0)
    return (4.0 * fine - coarse) / 3.0


def tau_variation_value(map, n=PRECONDITION_GRID):
    """
    Second variation along V = tau(phi) on a closed domain with |tau|
    constant: -4c |tau|^4 Vol(domain). Latitude maps, or equivariant maps
    whose domain is the round sphere model.
    """
    c = space_form_curvature(map.target.warping)
    if isinstance(map, LatitudeMap):
        F, _ = latitude_residuals(map)
        return -4.0 * c * F ** 4 * sphere_volume(map.domain_sphere_dim)

    if map.domain.warping.kind != 'spherical':
        raise PreconditionError("V = tau needs a closed domain; use a latitude map or a spherical domain")
    margin = 1e-3
    squares = [tension_F(map, r) ** 2 for r in sample_grid(margin, math.pi - margin, n)]
    spread = max(squares) - min(squares)
    if spread > TAU_SPREAD_TOLERANCE:
        raise PreconditionError(f"|tau|^2 is not constant: spread {spread:.3e}")
    tau_sq = sum(squares) / len(squares)
    return -4.0 * c * tau_sq * tau_sq * sphere_volume(map.m)


def divergence_identity_check(map, r):
    """
    sum <dphi(e_i), nabla_{e_i} tau> minus (div <dphi, tau> - |tau|^2),
    radially reduced; zero for every map.
    """
    f = radial_frame(map, r)
    lhs = f.rho1 * f.F1 + map.energy_density * f.F * f.w * f.g
    rhs = f.rho2 * f.F + f.rho1 * f.F1 + f.q * f.rho1 * f.F - f.F * f.F
    return lhs - rhs


@dataclass(frozen=True)
class IndexReport:
    grid_size: int
    dimension: int
    eigenvalues: tuple
    negative_count: int
    tol_index: float
    label: str = INDEX_LABEL

    def to_dict(self):
        return {
            'label': self.label,
            'grid_size': self.grid_size,
            'dimension': self.dimension,
            'eigenvalues': list(self.eigenvalues),
            'negative_count': self.negative_count,
            'tol_index': self.tol_index,
        }

    def csv_rows(self):
        return [[i, value] for i, value in enumerate(self.eigenvalues)]


def _hermite_shapes(s, h):
    """Cubic Hermite shape functions on one element and their first two r-derivatives"""
    values = np.array([1 - 3 * s ** 2 + 2 * s ** 3, h * (s - 2 * s ** 2 + s ** 3),
                       3 * s ** 2 - 2 * s ** 3, h * (-s ** 2 + s ** 3)])
    first = np.array([-6 * s + 6 * s ** 2, h * (1 - 4 * s + 3 * s ** 2),
                      6 * s - 6 * s ** 2, h * (-2 * s + 3 * s ** 2)]) / h
    second = np.array([-6 + 12 * s, h * (-4 + 6 * s), 6 - 12 * s, h * (-2 + 6 * s)]) / (h * h)
    return values, first, second


def _element_matrix(map, x0, x1, c):
    """Polarised second variation on the four local Hermite functions of [x0, x1]"""
    e = map.energy_density
    h = x1 - x0
    nodes, weights = quadrature_nodes(x0, x1, 1)
    local = np.zeros((4, 4))
    for r, weight in zip(nodes, weights):
        r = float(r)
        f = radial_frame(map, r)
        n0, n1, n2 = _hermite_shapes((r - x0) / h, h)
        L = n2 + f.q * n1 - e * f.w * f.g1 * n0
        T = f.rho1 * n1 + e * f.w * f.g * n0
        divergence = f.rho2 * f.F + f.rho1 * f.F1 + f.q * f.rho1 * f.F
        mass = np.outer(n0, n0)
        jacobi = np.outer(L, L)
        tension_sq = 2.0 * f.F * f.F * mass
        div = 2.0 * divergence * mass
        trace = f.F * (np.outer(n0, T) + np.outer(T, n0))
        gradient = f.rho1 * (f.F * (np.outer(n0, n1) + np.outer(n1, n0)) + 2.0 * f.F1 * mass)
        local += weight * f.sigma ** (map.m - 1) * (jacobi - c * (tension_sq - div - trace + gradient))
    return local


def assemble_hessian(map, a, b, n):
    """
    Matrix of the second variation over cubic Hermite elements on n
    interior nodes of [a, b]; value and slope are clamped to zero at both
    ends, leaving 2n unknowns (value, slope) per interior node.
    """
    c = space_form_curvature(map.target.warping)
    grid = np.linspace(a, b, n + 2)
    size = 2 * n
    matrix = np.zeros((size, size))
    for element in range(n + 1):
        local = _element_matrix(map, float(grid[element]), float(grid[element + 1]), c)
        # global dof of local (value, slope) at the left and right node; None on the clamped ends
        dofs = []
        for node in (element, element + 1):
            if 1 <= node <= n:
                dofs += [2 * (node - 1), 2 * (node - 1) + 1]
            else:
                dofs += [None, None]
        for i, gi in enumerate(dofs):
            if gi is None:
                continue
            for j, gj in enumerate(dofs):
                if gj is not None:
                    matrix[gi, gj] += local[i, j]
    return sphere_volume(map.m - 1) * matrix


def jacobi_eigenvalues(matrix, max_sweeps=MAX_SWEEPS):
    """
    Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.

    A pair (p, q) is annihilated without rotating once |a_pq| is below
    machine epsilon times sqrt(|a_pp a_qq|); a sweep without rotations ends
    the iteration.
    """
    a = np.array(matrix, dtype=float)
    size = a.shape[0]
    if size == 1:
        return [float(a[0, 0])]
    scale = np.sqrt(np.sum(a * a))
    if scale == 0.0:
        return [0.0] * size

    eps = np.finfo(float).eps
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(a, 1) ** 2))
        if off <= eps * scale:
            return sorted(float(x) for x in np.diag(a))
        rotations = 0
        for p in range(size - 1):
            for q in range(p + 1, size):
                apq = a[p, q]
                if abs(apq) <= eps * math.sqrt(abs(a[p, p] * a[q, q])):
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > THETA_LIMIT:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0)), theta)
                cos = 1.0 / math.sqrt(t * t + 1.0)
                sin = t * cos
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = cos * col_p - sin * col_q
                a[:, q] = sin * col_p + cos * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = cos * row_p - sin * row_q
                a[q, :] = sin * row_p + cos * row_q
                a[p, q] = a[q, p] = 0.0
                rotations += 1
        if rotations == 0:
            return sorted(float(x) for x in np.diag(a))
    raise SpectralError(f"Jacobi eigen-iteration did not converge in {max_sweeps} sweeps")


def stability_index(map, a=None, b=None, n=32, tol_index=None, tolerances=None):
    """
    Number of negative eigenvalues of the discretised second variation over
    radial variations vanishing to first order at a and b. Latitude maps use
    the 1x1 form of the constant variation.
    """
    tolerances = tolerances or Tolerances()
    if tol_index is None:
        tol_index = tolerances.tol_index

    if isinstance(map, LatitudeMap):
        matrix = np.array([[hessian_form(map, VariationField.uniform(1.0), tolerances=tolerances).value]])
        grid_size = 1
    else:
        if n < MIN_INDEX_NODES:
            raise DomainError(f"stability index needs at least {MIN_INDEX_NODES} interior nodes, got {n}")
        space_form_curvature(map.target.warping)
        _require_biharmonic(map, a, b, tolerances)
        matrix = assemble_hessian(map, a, b, n)
        grid_size = n

    asymmetry = float(np.max(np.abs(matrix - matrix.T)))
    if asymmetry > SYMMETRY_TOLERANCE:
        raise SpectralError(f"assembled form is not symmetric: max |Q - Q^T| = {asymmetry:.3e}")

    if tol_index is None:
        tol_index = 1e-6 * float(np.max(np.abs(matrix)))
    eigenvalues = jacobi_eigenvalues(matrix)
    return IndexReport(
        grid_size=grid_size,
        dimension=matrix.shape[0],
        eigenvalues=tuple(eigenvalues[:SMALLEST_REPORTED]),
        negative_count=sum(1 for x in eigenvalues if x < -tol_index),
        tol_index=tol_index,
    )
