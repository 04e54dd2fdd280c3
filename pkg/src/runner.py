"""
Command execution for biharmonic-lab: runs one validated RunConfig,
writes the JSON report and the CSV plot data, and returns the payload
shown on the terminal.
"""
import csv
import json
import math
import os

import numpy as np

from src.closed_forms import (
    almansi_decompose,
    classify_conformal_target,
    conformal_factor_residual,
    conformal_ode_residual,
    euclidean_exponents,
    FamilyCoefficients,
)
from src.config import build_boundary, build_map, build_models, with_parameter
from src.errors import BiharmonicError
from src.geometry import radial_curvature, space_form_curvature
from src.profiles import LatitudeMap, sample_grid
from src.solver import shoot_bvp
from src.tension import (
    classify,
    latitude_residuals,
    residual_report,
)
from src.variation import (
    VariationField,
    bienergy,
    bump_field,
    hessian_fd_oracle,
    hessian_form,
    stability_index,
    tau_variation_value,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

SWEEP_COLUMNS = ['param', 'value', 'tension', 'bitension', 'bienergy', 'verdict', 'error']

# A is rounded to this before picking the sinh / linear / sin branch
CLASSIFY_ZERO = 1e-9


def exit_code_for(exc):
    """2 for argument and configuration problems, 3 for numerical failures"""
    if isinstance(exc, ArithmeticError):
        return EXIT_NUMERICAL
    return EXIT_INVALID


def format_float(value):
    return '%.17g' % value


def _jsonable(value):
    """Replace NaN and infinities by null and numpy scalars by Python ones"""
    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def describe_map(map):
    if isinstance(map, LatitudeMap):
        return {
            'kind': 'latitude',
            'domain': f"S^{map.domain_sphere_dim}",
            'target': map.target.warping.kind,
            'eigenmap': map.eigenmap.name,
            'energy_density': map.energy_density,
            'rho0': map.rho0,
        }
    return {
        'kind': 'equivariant',
        'name': map.name,
        'domain': map.domain.warping.kind,
        'target': map.target.warping.kind,
        'm': map.m,
        'eigenmap': map.eigenmap.name,
        'energy_density': map.energy_density,
        'profile': map.profile.label,
        'profile_domain': str(map.profile.domain),
    }


class Runner:
    """
    Executes one run configuration and writes its outputs under out_dir.
    """
    def __init__(self, config, out_dir='.', verbose=False):
        self.config = config
        self.out_dir = os.path.abspath(out_dir)
        self.verbose = verbose
        self.written = []

    def log(self, message):
        """Print verbose messages if enabled"""
        if self.verbose:
            print(message)

    def run(self):
        """Run the configured command; returns the JSON payload that was written"""
        handler = getattr(self, f"_run_{self.config.command}")
        self.log(f"Running {self.config.command}...")
        payload = handler()
        payload = {'command': self.config.command, **payload}
        self.write_json(payload)
        return payload

    def write_json(self, payload):
        os.makedirs(self.out_dir, exist_ok=True)
        path = os.path.join(self.out_dir, self.config.json_name)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(_jsonable(payload), f, indent=2, allow_nan=False)
            f.write('\n')
        self.written.append(path)
        self.log(f"Wrote {path}")
        return path

    def write_csv(self, header, rows):
        os.makedirs(self.out_dir, exist_ok=True)
        path = os.path.join(self.out_dir, self.config.csv_name)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_float(x) if isinstance(x, float) else x for x in row])
        self.written.append(path)
        self.log(f"Wrote {path}")
        return path

    def _map(self):
        return build_map(self.config.map_spec)

    def _run_verify(self):
        map = self._map()
        if isinstance(map, LatitudeMap):
            F, bitension = latitude_residuals(map)
            verdict = classify(abs(F), abs(bitension), self.config.tolerances)
            return {
                'map': describe_map(map),
                'F': F,
                'bitension': bitension,
                'tau_squared': F * F,
                'bienergy': bienergy(map),
                'verdict': verdict,
            }
        a, b = self.config.interval
        report = residual_report(map, a, b, self.config.grid_n, self.config.tolerances)
        self.log(f"F_sup={report.F_sup:.3e} bitension_sup={report.bitension_sup:.3e}")
        self.write_csv(['r', 'F', 'bitension', 'conformality'], report.csv_rows())
        return {'map': describe_map(map), 'report': report.to_dict()}

    def _run_solve(self):
        domain, target, eigenmap = build_models(self.config.map_spec)
        left, right = build_boundary(self.config.bvp)
        result = shoot_bvp(domain.dimension, eigenmap.energy_density, domain.warping, target.warping,
                           left, right, self.config.solver, verbose=self.verbose)
        trajectory = result.trajectory
        rows = trajectory.csv_rows() + [trajectory.interpolate(float(r)).to_row()
                                        for r in self.config.bvp.get('samples', [])]
        self.write_csv(['r', 'rho', 'rho_p', 'F', 'F_p'], sorted(rows))
        return {
            'models': {'domain': domain.warping.kind, 'target': target.warping.kind,
                       'm': domain.dimension, 'eigenmap': eigenmap.name},
            'result': result.to_dict(),
        }

    def _run_stability(self):
        map = self._map()
        tolerances = self.config.tolerances
        index_spec = self.config.index or {}
        if isinstance(map, LatitudeMap):
            hessian = hessian_form(map, VariationField.uniform(1.0), tolerances=tolerances)
            index = stability_index(map, tol_index=index_spec.get('tol_index'), tolerances=tolerances)
            payload = {
                'map': describe_map(map),
                'hessian': hessian.to_dict(),
                'tau_variation_value': tau_variation_value(map),
                'index': index.to_dict(),
            }
        else:
            a, b = self.config.interval
            shape = (self.config.variation or {}).get('shape', [1.0])
            v = bump_field(a, b, shape)
            hessian = hessian_form(map, v, a, b, tolerances=tolerances)
            oracle = hessian_fd_oracle(map, v, a, b)
            self.log(f"Q={hessian.value!r} oracle={oracle!r}")
            index = stability_index(map, a, b, int(index_spec.get('n', 32)),
                                    tol_index=index_spec.get('tol_index'), tolerances=tolerances)
            payload = {
                'map': describe_map(map),
                'hessian': hessian.to_dict(),
                'fd_oracle': oracle,
                'index': index.to_dict(),
            }
        self.write_csv(['i', 'eigenvalue'], index.csv_rows())
        return payload

    def _run_families(self):
        spec = self.config.map_spec
        map = self._map()
        profile_spec = spec['profile']
        pair = euclidean_exponents(map.m, map.energy_density)
        payload = {
            'map': describe_map(map),
            'exponents': {'k_plus': pair.k_plus, 'k_minus': pair.k_minus},
            'terms': [list(t) for t in map.profile.terms],
        }
        if profile_spec['family'] == 'biharmonic' and map.m > 2:
            rho1, rho2 = almansi_decompose(map.m, map.energy_density,
                                           FamilyCoefficients(*profile_spec['coefficients']))
            payload['almansi'] = {'rho1': [list(t) for t in rho1.terms], 'rho2': [list(t) for t in rho2.terms]}
        if self.config.interval:
            a, b = self.config.interval
            report = residual_report(map, a, b, self.config.grid_n, self.config.tolerances)
            payload['report'] = report.to_dict()
            self.write_csv(['r', 'F', 'bitension', 'conformality'], report.csv_rows())
        return payload

    def _run_classify(self):
        map = self._map()
        a, b = self.config.interval
        c = space_form_curvature(map.domain.warping)
        factor = conformal_factor_residual(map, c, a, b, self.config.grid_n)
        A = 0.0 if abs(factor.A_mean) < CLASSIFY_ZERO else factor.A_mean
        warping = classify_conformal_target(A, c)
        radii = sample_grid(0.05, min(3.0, 0.95 * warping.domain.upper), self.config.grid_n)
        ode_sup = max(abs(conformal_ode_residual(warping, A, c, rho)) for rho in radii)
        curvature = radial_curvature(warping, radii[len(radii) // 2])
        return {
            'map': describe_map(map),
            'conformal_factor': factor.to_dict(),
            'A': A,
            'target_family': 'flat' if A == 0 else ('hyperbolic' if A > 0 else 'spherical'),
            'target_curvature': curvature,
            'ode_residual_sup': ode_sup,
        }

    def _run_sweep(self):
        sweep = self.config.sweep
        param = sweep['param']
        steps = int(sweep.get('steps', 1))
        values = sample_grid(sweep['from'], sweep['to'], steps) if steps > 1 else [float(sweep['from'])]
        # points are evaluated in parameter order, one row each
        rows = [self.sweep_point(param, value) for value in values]
        self.write_csv(SWEEP_COLUMNS, rows)
        failures = sum(1 for row in rows if row[-1])
        return {'param': param, 'points': len(rows), 'failures': failures}

    def sweep_point(self, param, value):
        """One sweep row; failures become NaN values with the error message"""
        try:
            map = build_map(with_parameter(self.config.map_spec, param, value))
            if isinstance(map, LatitudeMap):
                F, bitension = latitude_residuals(map)
                energy = bienergy(map)
                verdict = classify(abs(F), abs(bitension), self.config.tolerances)
            else:
                a, b = self.config.interval
                report = residual_report(map, a, b, self.config.grid_n, self.config.tolerances)
                F, bitension, verdict = report.F_sup, report.bitension_sup, report.verdict
                energy = bienergy(map, a, b)
            return [param, value, F, bitension, energy, verdict, '']
        except (BiharmonicError, ValueError, ArithmeticError) as exc:
            self.log(f"{param}={value!r} failed: {exc}")
            return [param, value, math.nan, math.nan, math.nan, '', f"{type(exc).__name__}: {exc}"]
