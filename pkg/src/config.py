"""
Run configuration: loading the JSON file, validating it against the
catalogs and turning the map block into library objects.

Validation never does numerics; it only resolves names and compares
intervals against the domains the named objects declare.
"""
import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from src.closed_forms import (
    CLASSIFICATION_MAPS,
    FamilyCoefficients,
    biharmonic_family,
    classification_map,
    harmonic_family,
    regular_pole_family,
)
from src.errors import BiharmonicError, CatalogError, ConfigError
from src.geometry import BUILTIN_WARPINGS, ModelSpace, builtin_warping, is_positive_number
from src.profiles import EquivariantMap, LatitudeMap, eigenmap_catalog, make_polynomial_profile, suggest
from src.solver import FixedLeft, PoleLeft, RightTarget, SolverConfig
from src.tension import Tolerances
from src.variation import MIN_INDEX_NODES

COMMANDS = ('verify', 'solve', 'stability', 'families', 'classify', 'sweep')
MAP_KINDS = ('equivariant', 'latitude')
FAMILIES = ('harmonic', 'biharmonic', 'regular_pole')
FAMILY_SIZES = {'harmonic': 2, 'biharmonic': 4}
SWEEP_PARAMETERS = ('rho0', 'c1', 'c2', 'c3', 'c4', 'C1', 'C2')
BVP_MODES = ('pole', 'fixed')
OBJECT_BLOCKS = ('interval', 'tolerances', 'solver', 'bvp', 'variation', 'index', 'sweep', 'output')

DEFAULT_GRID_N = 64


@dataclass(frozen=True)
class RunConfig:
    """A validated run description; `raw` keeps the parsed JSON for reports"""
    command: str
    map_spec: dict
    interval: tuple = None
    grid_n: int = DEFAULT_GRID_N
    tolerances: Tolerances = field(default_factory=Tolerances)
    solver: SolverConfig = field(default_factory=SolverConfig)
    bvp: dict = None
    variation: dict = None
    index: dict = None
    sweep: dict = None
    output: dict = None
    raw: dict = None

    @property
    def json_name(self):
        return (self.output or {}).get('json', f"{self.command}.json")

    @property
    def csv_name(self):
        return (self.output or {}).get('csv', f"{self.command}.csv")


def load_config(path):
    """Read and validate a config file; raises ConfigError with every diagnostic"""
    path = Path(path)
    try:
        with path.open('r', encoding='utf-8') as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError([{'field': 'config', 'message': f"cannot read {path}: {exc}"}])
    return parse_config(text)


def parse_config(text):
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([{
            'field': 'json',
            'message': f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}",
            'line': exc.lineno,
        }])
    if not isinstance(payload, dict):
        raise ConfigError([{'field': 'config', 'message': "expected a JSON object"}])
    diagnostics = validate(payload)
    if diagnostics:
        raise ConfigError(diagnostics)
    return from_dict(payload)


def from_dict(payload):
    interval = payload.get('interval')
    return RunConfig(
        command=payload['command'],
        map_spec=payload.get('map', {}),
        interval=(float(interval['a']), float(interval['b'])) if interval else None,
        grid_n=int(payload.get('grid_n', DEFAULT_GRID_N)),
        tolerances=Tolerances(**payload.get('tolerances', {})),
        solver=SolverConfig(**payload.get('solver', {})),
        bvp=payload.get('bvp'),
        variation=payload.get('variation'),
        index=payload.get('index'),
        sweep=payload.get('sweep'),
        output=payload.get('output'),
        raw=payload,
    )


def _diagnostic(field_name, message, suggestions=None):
    entry = {'field': field_name, 'message': message}
    if suggestions:
        entry['suggestions'] = list(suggestions)
    return entry


def _catalog_miss(field_name, value, choices):
    matches = suggest(value, choices)
    hint = f"; did you mean {matches[0]!r}?" if matches else ""
    return _diagnostic(field_name, f"catalog miss: unknown {field_name.split('.')[-1]} {value!r}{hint}", matches)


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def validate(payload):
    """
    Check a parsed config and return a list of {field, message} diagnostics.
    An empty list means the run will get past every precondition check.
    """
    try:
        return _validate(payload)
    except (AttributeError, IndexError, KeyError, TypeError) as exc:
        return [_diagnostic('config', f"malformed config: {type(exc).__name__}: {exc}")]


def _validate(payload):
    diagnostics = []
    command = payload.get('command')
    if command not in COMMANDS:
        diagnostics.append(_catalog_miss('command', command, COMMANDS))
        return diagnostics

    spec = payload.get('map')
    if not isinstance(spec, dict):
        diagnostics.append(_diagnostic('map', "missing map block"))
        return diagnostics
    for block in OBJECT_BLOCKS:
        if block in payload and not isinstance(payload[block], dict):
            diagnostics.append(_diagnostic(block, f"{block} must be an object, got {type(payload[block]).__name__}"))
    if 'profile' in spec and not isinstance(spec['profile'], dict):
        diagnostics.append(_diagnostic('map.profile', "profile must be an object"))
    if diagnostics:
        return diagnostics

    diagnostics += _validate_knobs(payload)
    diagnostics += _validate_options(payload)
    kind = spec.get('kind', 'equivariant')
    if kind not in MAP_KINDS:
        diagnostics.append(_catalog_miss('map.kind', kind, MAP_KINDS))
        return diagnostics

    try:
        built = build_models(spec) if command == 'solve' else build_map(spec)
    except CatalogError as exc:
        diagnostics.append(_diagnostic(_field_of(exc), str(exc), exc.suggestions))
        return diagnostics
    except (BiharmonicError, KeyError, TypeError, ValueError) as exc:
        diagnostics.append(_diagnostic(_field_of(exc), str(exc)))
        return diagnostics

    if isinstance(built, EquivariantMap):
        diagnostics += _validate_interval(payload, built, required=command != 'solve')
    if command == 'solve':
        diagnostics += _validate_bvp(payload.get('bvp'), kind)
    if command in ('families',) and 'family' not in spec.get('profile', {}):
        diagnostics.append(_diagnostic('map.profile.family', "the families command needs a named family profile"))
    if command == 'classify' and 'classification' not in spec.get('profile', {}):
        diagnostics.append(_diagnostic('map.profile.classification', "the classify command needs a classification map"))
    if command == 'sweep':
        diagnostics += _validate_sweep(payload.get('sweep'), spec, kind)
    return diagnostics


def _field_of(exc):
    return getattr(exc, 'field', 'map')


class _FieldError(ValueError):
    """Carries the config field a map-building failure belongs to"""
    def __init__(self, field_name, message):
        super().__init__(message)
        self.field = field_name


def _validate_knobs(payload):
    diagnostics = []
    for block, factory in (('tolerances', Tolerances), ('solver', SolverConfig)):
        try:
            factory(**payload.get(block, {}))
        except TypeError as exc:
            diagnostics.append(_diagnostic(block, f"unknown {block} setting: {exc}"))
        except ValueError as exc:
            diagnostics.append(_diagnostic(block, str(exc)))
    grid_n = payload.get('grid_n', DEFAULT_GRID_N)
    if not isinstance(grid_n, int) or grid_n < 8:
        diagnostics.append(_diagnostic('grid_n', f"grid_n must be an integer >= 8, got {grid_n!r}"))
    return diagnostics


def _validate_options(payload):
    """variation, index and output blocks"""
    diagnostics = []
    shape = payload.get('variation', {}).get('shape', [1.0])
    if not isinstance(shape, list) or not shape or not all(_is_number(c) for c in shape):
        diagnostics.append(_diagnostic('variation.shape', "shape must be a non-empty list of numbers"))
    index = payload.get('index', {})
    n = index.get('n', 32)
    if isinstance(n, bool) or not isinstance(n, int) or n < MIN_INDEX_NODES:
        diagnostics.append(_diagnostic('index.n', f"n must be an integer >= {MIN_INDEX_NODES}, got {n!r}"))
    tol_index = index.get('tol_index')
    if tol_index is not None and not is_positive_number(tol_index):
        diagnostics.append(_diagnostic('index.tol_index', f"tol_index must be a positive number, got {tol_index!r}"))
    for key, value in payload.get('output', {}).items():
        if key not in ('json', 'csv'):
            diagnostics.append(_catalog_miss('output', key, ('json', 'csv')))
        elif not isinstance(value, str) or not value:
            diagnostics.append(_diagnostic(f"output.{key}", "output file names must be non-empty strings"))
    return diagnostics


def _validate_interval(payload, built, required):
    interval = payload.get('interval')
    if interval is None:
        return [_diagnostic('interval', "missing interval {a, b}")] if required else []
    a, b = interval.get('a'), interval.get('b')
    if not (_is_number(a) and _is_number(b)):
        return [_diagnostic('interval', "interval needs numeric a and b")]
    if not a < b:
        return [_diagnostic('interval', f"empty interval: a={a!r} must be smaller than b={b!r}")]
    diagnostics = []
    domain = built.domain.warping.domain
    if not (domain.contains(a) and domain.contains(b)):
        diagnostics.append(_diagnostic('interval', f"interval exceeds domain warping interval {domain}"))
    elif a <= domain.lower:
        diagnostics.append(_diagnostic('interval', f"interval must stay away from the pole r={domain.lower:g}"))
    elif domain.upper_closed and b >= domain.upper:
        diagnostics.append(_diagnostic('interval', f"interval must stay away from the pole r={domain.upper:g}"))
    profile_domain = built.profile.domain
    if not (profile_domain.contains(a) and profile_domain.contains(b)):
        diagnostics.append(_diagnostic('interval', f"interval exceeds profile domain {profile_domain}"))
    return diagnostics


def _validate_bvp(bvp, kind):
    if kind != 'equivariant':
        return [_diagnostic('map.kind', "boundary value problems need an equivariant map")]
    if not isinstance(bvp, dict):
        return [_diagnostic('bvp', "missing bvp block")]
    diagnostics = []
    left, right = bvp.get('left'), bvp.get('right')
    if not isinstance(left, dict):
        diagnostics.append(_diagnostic('bvp.left', "missing left boundary condition"))
    elif left.get('mode', 'pole') not in BVP_MODES:
        diagnostics.append(_catalog_miss('bvp.left.mode', left.get('mode'), BVP_MODES))
    elif left.get('mode', 'pole') == 'fixed' and not all(_is_number(left.get(k)) for k in ('r', 'rho', 'rho_p')):
        diagnostics.append(_diagnostic('bvp.left', "fixed left boundary needs numeric r, rho and rho_p"))
    if not isinstance(right, dict) or not all(_is_number(right.get(k)) for k in ('r', 'rho', 'rho_p')):
        diagnostics.append(_diagnostic('bvp.right', "right boundary needs numeric r, rho and rho_p"))
    samples = bvp.get('samples', [])
    if not isinstance(samples, list) or not all(_is_number(r) for r in samples):
        diagnostics.append(_diagnostic('bvp.samples', "samples must be a list of radii"))
    return diagnostics


def _validate_sweep(sweep, spec, kind):
    if not isinstance(sweep, dict):
        return [_diagnostic('sweep', "missing sweep block")]
    diagnostics = []
    param = sweep.get('param')
    if param not in SWEEP_PARAMETERS:
        diagnostics.append(_catalog_miss('sweep.param', param, SWEEP_PARAMETERS))
    elif (param == 'rho0') != (kind == 'latitude'):
        diagnostics.append(_diagnostic('sweep.param', f"parameter {param!r} does not apply to a {kind} map"))
    elif param != 'rho0' and _family_parameter(spec, param) is None:
        diagnostics.append(_diagnostic('sweep.param', f"parameter {param!r} is not a coefficient of the profile family"))
    start, stop, steps = sweep.get('from'), sweep.get('to'), sweep.get('steps', 1)
    if not (_is_number(start) and _is_number(stop)):
        diagnostics.append(_diagnostic('sweep', "sweep needs numeric from and to"))
    if not isinstance(steps, int) or steps < 1:
        diagnostics.append(_diagnostic('sweep.steps', f"steps must be a positive integer, got {steps!r}"))
    return diagnostics


def _family_parameter(spec, param):
    """Location of a sweepable coefficient inside the profile block, or None"""
    profile = spec.get('profile', {})
    family = profile.get('family')
    if family == 'regular_pole' and param in ('C1', 'C2'):
        return param
    if family in FAMILY_SIZES and param in ('c1', 'c2', 'c3', 'c4'):
        index = int(param[1]) - 1
        return index if index < FAMILY_SIZES[family] else None
    return None


def with_parameter(spec, param, value):
    """Copy of a map block with one sweep parameter replaced"""
    spec = copy.deepcopy(spec)
    if param == 'rho0':
        spec['rho0'] = value
        return spec
    location = _family_parameter(spec, param)
    profile = spec['profile']
    if isinstance(location, str):
        profile[location] = value
    else:
        coefficients = list(profile.get('coefficients', [0.0] * FAMILY_SIZES[profile['family']]))
        coefficients[location] = value
        profile['coefficients'] = coefficients
    return spec


def _warping(field_name, kind):
    if kind not in BUILTIN_WARPINGS:
        matches = suggest(kind, BUILTIN_WARPINGS)
        error = CatalogError(f"catalog miss: unknown warping {kind!r}", suggestions=matches)
        error.field = field_name
        raise error
    return builtin_warping(kind)


def _eigenmap(spec, default):
    try:
        return eigenmap_catalog(spec.get('eigenmap', default))
    except CatalogError as exc:
        exc.field = 'map.eigenmap'
        raise


def _profile(profile_spec, m, energy_density):
    if 'terms' in profile_spec:
        terms = profile_spec['terms']
        if not isinstance(terms, list) or not all(isinstance(t, list) and len(t) in (2, 3) for t in terms):
            raise _FieldError('map.profile.terms', "terms must be a list of [coefficient, exponent, log_flag]")
        return make_polynomial_profile([(t[0], t[1], t[2] if len(t) == 3 else False) for t in terms])

    family = profile_spec.get('family')
    if family not in FAMILIES:
        error = CatalogError(f"catalog miss: unknown family {family!r}", suggestions=suggest(family, FAMILIES))
        error.field = 'map.profile.family'
        raise error
    if family == 'regular_pole':
        if m != 4 or energy_density != 3:
            raise _FieldError('map.profile.family', "the regular_pole family needs m=4 and the identity eigenmap")
        return regular_pole_family(float(profile_spec.get('C1', 1.0)), float(profile_spec.get('C2', 0.0)))

    coefficients = profile_spec.get('coefficients', [])
    if len(coefficients) != FAMILY_SIZES[family] or not all(_is_number(c) for c in coefficients):
        raise _FieldError('map.profile.coefficients',
                          f"the {family} family takes {FAMILY_SIZES[family]} numeric coefficients")
    if family == 'harmonic':
        return harmonic_family(m, energy_density, *coefficients)
    return biharmonic_family(m, energy_density, FamilyCoefficients(*coefficients))


def build_map(spec):
    """Turn a map block into an EquivariantMap or a LatitudeMap"""
    kind = spec.get('kind', 'equivariant')
    profile_spec = spec.get('profile', {})
    if kind == 'equivariant' and 'classification' in profile_spec:
        which = profile_spec['classification']
        if which not in CLASSIFICATION_MAPS:
            error = CatalogError(f"catalog miss: unknown classification map {which!r}",
                                 suggestions=suggest(which, CLASSIFICATION_MAPS))
            error.field = 'map.profile.classification'
            raise error
        return classification_map(which)

    if kind == 'latitude':
        _, target, eigenmap = build_models(spec)
        rho0 = spec.get('rho0')
        if not _is_number(rho0):
            raise _FieldError('map.rho0', f"latitude maps need a numeric rho0, got {rho0!r}")
        return LatitudeMap(spec['m'] - 1, eigenmap, float(rho0), target, name=spec.get('name', 'latitude'))

    domain, target, eigenmap = build_models(spec)
    if profile_spec.get('family') and (domain.warping.kind != 'flat' or target.warping.kind != 'flat'):
        raise _FieldError('map.profile.family', "closed-form families live on flat domain and flat target")
    profile = _profile(profile_spec, domain.dimension, eigenmap.energy_density)
    return EquivariantMap(domain, target, eigenmap, profile, name=spec.get('name', ''))


def build_models(spec):
    """
    (domain, target, eigenmap) of a map block. Latitude maps live on
    S^{m-1}; their domain model is returned but not used.
    """
    profile_spec = spec.get('profile', {})
    if 'classification' in profile_spec and spec.get('kind', 'equivariant') == 'equivariant':
        built = build_map(spec)
        return built.domain, built.target, built.eigenmap
    m = spec.get('m')
    if not isinstance(m, int) or m < 2:
        raise _FieldError('map.m', f"m must be an integer >= 2, got {m!r}")
    n = spec.get('n', m)
    if not isinstance(n, int) or n < 2:
        raise _FieldError('map.n', f"n must be an integer >= 2, got {n!r}")
    domain = ModelSpace(m, _warping('map.domain', spec.get('domain', 'flat')))
    target = ModelSpace(n, _warping('map.target', spec.get('target', 'flat')))
    return domain, target, _eigenmap(spec, f"identity({m - 1})")


def build_boundary(bvp):
    """(left, right) boundary objects of a bvp block"""
    left_spec, right_spec = bvp['left'], bvp['right']
    if left_spec.get('mode', 'pole') == 'pole':
        left = PoleLeft(
            epsilon=float(left_spec.get('epsilon', 1e-3)),
            C1_guess=float(left_spec.get('C1', 1.0)),
            C2_guess=float(left_spec.get('C2', 0.0)),
        )
    else:
        left = FixedLeft(
            r=float(left_spec['r']),
            rho=float(left_spec['rho']),
            rho_p=float(left_spec['rho_p']),
            F_guess=float(left_spec.get('F', 0.0)),
            F_p_guess=float(left_spec.get('F_p', 0.0)),
        )
    right = RightTarget(float(right_spec['r']), float(right_spec['rho']), float(right_spec['rho_p']))
    return left, right
