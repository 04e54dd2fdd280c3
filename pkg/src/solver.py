"""
Integration of the radial biharmonic system and shooting for boundary
value problems.

The fourth-order equation is integrated as the first-order system in
(rho, rho', F, F'):

    rho'' = F - (m-1)(sigma'/sigma) rho' + 2k (lambda lambda')(rho) / sigma^2
    F''   = -(m-1)(sigma'/sigma) F' + 2k (lambda lambda')'(rho) / sigma^2 * F
"""
import bisect
import math
from dataclasses import dataclass

import numpy as np

from src.errors import (
    DomainError,
    NoConvergenceError,
    RangeError,
    RangeEscapeError,
    SingularityError,
    StiffnessError,
    UnsupportedStartError,
)
from src.geometry import POLE_TOLERANCE, Interval, is_positive_number
from src.profiles import RadialProfile, eigenmap_catalog

# Dormand-Prince 5(4): nodes, stage matrix, 5th order weights, error weights
DP_NODES = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
DP_STAGES = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
DP_WEIGHTS = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
DP_ERROR = DP_WEIGHTS - np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)

# PI step control
SAFETY = 0.9
ALPHA = 0.7 / 5
BETA = 0.4 / 5
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0

MAX_POLE_EPSILON = 1e-2


@dataclass(frozen=True)
class ODEState:
    """A point (r, rho, rho', F, F') of the radial system"""
    r: float
    rho: float
    rho_p: float
    F: float
    F_p: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.r, self.rho, self.rho_p, self.F, self.F_p)):
            raise DomainError(f"non-finite ODE state {self}")

    def vector(self):
        return np.array([self.rho, self.rho_p, self.F, self.F_p])

    @classmethod
    def from_vector(cls, r, y):
        return cls(float(r), float(y[0]), float(y[1]), float(y[2]), float(y[3]))

    def to_row(self):
        return [self.r, self.rho, self.rho_p, self.F, self.F_p]


@dataclass(frozen=True)
class SolverConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    h_min: float = 1e-10
    h_max: float = 0.05
    newton_tol: float = 1e-10
    newton_max_iter: int = 30
    fd_jacobian_step: float = 1e-6

    def __post_init__(self):
        for name in ('rel_tol', 'abs_tol', 'h_min', 'h_max', 'newton_tol', 'fd_jacobian_step'):
            if not is_positive_number(getattr(self, name)):
                raise DomainError(f"solver setting {name} must be a positive finite number, got {getattr(self, name)!r}")
        if isinstance(self.newton_max_iter, bool) or not isinstance(self.newton_max_iter, int):
            raise DomainError(f"newton_max_iter must be an integer, got {self.newton_max_iter!r}")
        if not self.h_min < self.h_max:
            raise DomainError(f"h_min={self.h_min!r} must be smaller than h_max={self.h_max!r}")
        if self.newton_max_iter < 1:
            raise DomainError(f"newton_max_iter must be >= 1, got {self.newton_max_iter}")


class RadialSystem:
    """Right-hand side of the first-order radial system"""

    def __init__(self, m, energy_density, sigma, lam):
        self.m = m
        self.energy_density = energy_density
        self.sigma = sigma
        self.lam = lam

    def coefficients(self, r, rho):
        """(q, w, g, g') at (r, rho) with q = (m-1) sigma'/sigma, w = 1/sigma^2, g = lambda lambda'"""
        s = self.sigma.evaluate(r, 0)
        if s == 0.0:
            raise SingularityError(f"domain warping vanishes at r={r!r}")
        if not self.lam.target_domain.contains(rho):
            raise RangeError(f"rho={rho!r} at r={r!r} left the target domain {self.lam.target_domain}")
        lam0, lam1, lam2 = (self.lam.evaluate_target(rho, k) for k in range(3))
        return ((self.m - 1) * self.sigma.evaluate(r, 1) / s, 1.0 / (s * s),
                lam0 * lam1, lam1 * lam1 + lam0 * lam2)

    def __call__(self, r, y):
        rho, rho_p, F, F_p = y
        q, w, g, g1 = self.coefficients(r, rho)
        e = self.energy_density
        return np.array([
            rho_p,
            F - q * rho_p + e * w * g,
            F_p,
            -q * F_p + e * w * g1 * F,
        ])


def _hermite(x, x0, x1, y0, y1, d0, d1):
    """Cubic Hermite value at x; h may be negative on decreasing segments"""
    h = x1 - x0
    s = (x - x0) / h
    s2, s3 = s * s, s * s * s
    return ((2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0
            + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * d1)


class Trajectory:
    """
    Accepted states of one integration run, in integration order, with
    cubic Hermite dense output built from the system slopes at each state.
    """

    def __init__(self, states, slopes, system):
        self.states = tuple(states)
        self.slopes = tuple(slopes)
        self.system = system
        self._radii = [s.r for s in self.states]
        self._increasing = len(self._radii) < 2 or self._radii[-1] > self._radii[0]

    @property
    def start(self):
        return self.states[0]

    @property
    def end(self):
        return self.states[-1]

    @property
    def interval(self):
        lo, hi = min(self._radii), max(self._radii)
        return Interval(lo, hi, True, True)

    def __len__(self):
        return len(self.states)

    def _segment(self, r):
        if not self.interval.contains(r):
            raise DomainError(f"r={r!r} is outside the integrated interval {self.interval}")
        keys = self._radii if self._increasing else [-x for x in self._radii]
        target = r if self._increasing else -r
        i = bisect.bisect_right(keys, target) - 1
        return min(max(i, 0), len(self.states) - 2)

    def interpolate(self, r):
        """Dense-output state at r"""
        if len(self.states) == 1:
            if r != self.states[0].r:
                raise DomainError(f"r={r!r} is outside the single-point trajectory at {self.states[0].r!r}")
            return self.states[0]
        i = self._segment(r)
        a, b = self.states[i], self.states[i + 1]
        if r == a.r:
            return a
        if r == b.r:
            return b
        y = _hermite(r, a.r, b.r, a.vector(), b.vector(), self.slopes[i], self.slopes[i + 1])
        return ODEState.from_vector(r, y)

    def profile(self):
        """
        The integrated rho as a profile of order 2, with rho'' taken from
        the interpolated F so that the tension of the profile is F itself.
        """
        system = self.system

        def evaluator(r, order):
            state = self.interpolate(r)
            if order == 0:
                return state.rho
            if order == 1:
                return state.rho_p
            q, w, g, _ = system.coefficients(r, state.rho)
            return state.F - q * state.rho_p + system.energy_density * w * g

        return RadialProfile(evaluator=evaluator, max_order=2, domain=self.interval, label="integrated profile")

    def csv_rows(self):
        return [s.to_row() for s in self.states]


def _error_norm(error, y, y_new, cfg):
    scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.max(np.abs(error) / scale))


def _stages(system, r, y, h, k1):
    ks = [k1]
    for i in range(1, 7):
        increment = sum(a * k for a, k in zip(DP_STAGES[i], ks))
        ks.append(system(r + DP_NODES[i] * h, y + h * increment))
    return ks


def integrate_ivp(m, energy_density, sigma, lam, s0, r_end, cfg=None):
    """
    Integrate the radial system from s0 to r_end (either direction) with an
    embedded Dormand-Prince 5(4) pair under PI step-size control.

    Raises:
        StiffnessError: the step size dropped below cfg.h_min
        RangeEscapeError: rho left the target warping domain
    """
    cfg = cfg or SolverConfig()
    system = RadialSystem(m, energy_density, sigma, lam)
    for r in (s0.r, r_end):
        if not sigma.domain.contains(r):
            raise DomainError(f"r={r!r} is outside the domain warping interval {sigma.domain}")
    if not lam.target_domain.contains(s0.rho):
        raise RangeEscapeError(f"initial rho={s0.rho!r} is outside the target domain {lam.target_domain}", last_state=s0)

    y = s0.vector()
    r = s0.r
    k1 = system(r, y)
    states, slopes = [s0], [k1]
    if r_end == r:
        return Trajectory(states, slopes, system)

    direction = 1.0 if r_end > r else -1.0
    h = min(cfg.h_max, abs(r_end - r))
    previous_error = 1.0
    while direction * (r_end - r) > 0:
        remaining = abs(r_end - r)
        step = min(h, remaining)
        try:
            ks = _stages(system, r, y, direction * step, k1)
            y_new = y + direction * step * sum(b * k for b, k in zip(DP_WEIGHTS, ks))
            error = direction * step * sum(e * k for e, k in zip(DP_ERROR, ks))
            err = _error_norm(error, y, y_new, cfg) if np.all(np.isfinite(y_new)) else math.inf
            escaped = False
        except RangeError:
            err, escaped = math.inf, True

        if err <= 1.0:
            r_new = r_end if step == remaining else r + direction * step
            y, r = y_new, r_new
            k1 = ks[-1]
            states.append(ODEState.from_vector(r, y))
            slopes.append(k1)
            factor = MAX_FACTOR if err == 0.0 else SAFETY * err ** -ALPHA * previous_error ** BETA
            h = step * min(MAX_FACTOR, max(MIN_FACTOR, factor))
            previous_error = max(err, 1e-4)
        else:
            factor = MIN_FACTOR if not math.isfinite(err) else SAFETY * err ** -0.2
            h = step * min(1.0, max(MIN_FACTOR, factor))
            if h < cfg.h_min:
                if escaped:
                    raise RangeEscapeError(
                        f"rho left the target domain {lam.target_domain} near r={r!r}", last_state=states[-1]
                    )
                raise StiffnessError(f"step size fell below h_min={cfg.h_min!r} at r={r!r}")
        h = min(h, cfg.h_max)
    return Trajectory(states, slopes, system)


def regular_pole_start(m, eigenmap, lam, C1, C2, epsilon):
    """
    State at r = epsilon of the solution with rho(0) = 0, taken from the
    flat-domain germ rho = C1 r + C2 r^3, F = 12 C2 r. The truncation error
    is O(epsilon^3) relative on curved targets and zero on flat ones.
    """
    if m != 4 or not eigenmap.is_identity or eigenmap.domain_sphere_dim != 3:
        raise UnsupportedStartError(
            f"regular pole starts need m=4 with the identity eigenmap, got m={m}, eigenmap {eigenmap.name}"
        )
    if not 0 < epsilon <= MAX_POLE_EPSILON:
        raise DomainError(f"epsilon must lie in (0, {MAX_POLE_EPSILON}], got {epsilon!r}")
    if abs(lam.evaluate(0.0, 1) - 1.0) > POLE_TOLERANCE:
        raise UnsupportedStartError("regular pole starts need a target warping with lambda'(0) = 1")
    return ODEState(
        epsilon,
        C1 * epsilon + C2 * epsilon ** 3,
        C1 + 3.0 * C2 * epsilon ** 2,
        12.0 * C2 * epsilon,
        12.0 * C2,
    )


@dataclass(frozen=True)
class FixedLeft:
    """(rho, rho') prescribed at r; (F, F') are the shooting unknowns"""
    r: float
    rho: float
    rho_p: float
    F_guess: float = 0.0
    F_p_guess: float = 0.0


@dataclass(frozen=True)
class PoleLeft:
    """rho(0) = 0 regularity; (C1, C2) of the pole germ are the shooting unknowns"""
    epsilon: float = 1e-3
    C1_guess: float = 1.0
    C2_guess: float = 0.0


@dataclass(frozen=True)
class RightTarget:
    r: float
    rho: float
    rho_p: float


@dataclass(frozen=True)
class ShootingResult:
    profile: RadialProfile
    trajectory: Trajectory
    parameters: tuple
    iterations: int
    mismatch: tuple

    def to_dict(self):
        return {
            'parameters': list(self.parameters),
            'iterations': self.iterations,
            'mismatch': list(self.mismatch),
            'r_start': self.trajectory.start.r,
            'r_end': self.trajectory.end.r,
            'steps': len(self.trajectory) - 1,
        }


class ShootingSolver:
    """
    Newton shooting on two unknowns at the left end against (rho, rho')
    targets at the right end, with a forward-difference Jacobian.
    """

    def __init__(self, m, energy_density, sigma, lam, cfg=None, verbose=False):
        self.m = m
        self.energy_density = energy_density
        self.sigma = sigma
        self.lam = lam
        self.cfg = cfg or SolverConfig()
        self.verbose = verbose

    def log(self, message):
        """Print verbose messages if enabled"""
        if self.verbose:
            print(message)

    def _start(self, left, params):
        if isinstance(left, PoleLeft):
            if self.energy_density != self.m - 1:
                raise UnsupportedStartError(
                    f"regular pole starts need the identity eigenmap (2k = m-1), got 2k={self.energy_density!r}"
                )
            eigenmap = eigenmap_catalog(f"identity({self.m - 1})")
            return regular_pole_start(self.m, eigenmap, self.lam, params[0], params[1], left.epsilon)
        return ODEState(left.r, left.rho, left.rho_p, params[0], params[1])

    def _initial_parameters(self, left):
        if isinstance(left, PoleLeft):
            return np.array([left.C1_guess, left.C2_guess], dtype=float)
        return np.array([left.F_guess, left.F_p_guess], dtype=float)

    def _shoot(self, left, right, params):
        trajectory = integrate_ivp(self.m, self.energy_density, self.sigma, self.lam,
                                   self._start(left, params), right.r, self.cfg)
        end = trajectory.end
        return trajectory, np.array([end.rho - right.rho, end.rho_p - right.rho_p])

    def solve(self, left, right):
        cfg = self.cfg
        params = self._initial_parameters(left)
        scale = np.array([1.0 + abs(right.rho), 1.0 + abs(right.rho_p)])
        trajectory, residual = self._shoot(left, right, params)

        for iteration in range(cfg.newton_max_iter + 1):
            self.log(f"newton {iteration}: params={params.tolist()} mismatch={residual.tolist()}")
            if np.all(np.abs(residual) <= cfg.newton_tol * scale):
                return ShootingResult(trajectory.profile(), trajectory, tuple(params.tolist()),
                                      iteration, tuple(residual.tolist()))
            if iteration == cfg.newton_max_iter:
                break

            jacobian = np.empty((2, 2))
            for j in range(2):
                bumped = params.copy()
                step = cfg.fd_jacobian_step * max(1.0, abs(params[j]))
                bumped[j] += step
                _, shifted = self._shoot(left, right, bumped)
                jacobian[:, j] = (shifted - residual) / step
            try:
                params = params - np.linalg.solve(jacobian, residual)
            except np.linalg.LinAlgError:
                raise NoConvergenceError("singular shooting Jacobian", mismatch=tuple(residual.tolist()))
            trajectory, residual = self._shoot(left, right, params)

        raise NoConvergenceError(
            f"Newton shooting did not converge in {cfg.newton_max_iter} iterations",
            mismatch=tuple(residual.tolist()),
        )


def shoot_bvp(m, energy_density, sigma, lam, left, right, cfg=None, verbose=False):
    """Solve the two-point problem; the result's .profile is trajectory-backed with max_order 2"""
    return ShootingSolver(m, energy_density, sigma, lam, cfg, verbose).solve(left, right)
