#!/usr/bin/env python3
"""
Writes a set of example run configurations for biharmonic-lab,
one per command, covering the benchmark maps.
"""
import argparse
import json
import math
import os

INVERSION = {'profile': {'classification': 'inversion'}}
STEREOGRAPHIC = {'profile': {'classification': 'stereographic'}}
HYPERBOLIC = {'profile': {'classification': 'hyperbolic'}}
HOPF_LATITUDE = {
    'kind': 'latitude',
    'm': 4,
    'n': 3,
    'target': 'spherical',
    'eigenmap': 'hopf',
    'rho0': math.pi / 4,
}
REGULAR_POLE = {
    'domain': 'flat',
    'target': 'flat',
    'm': 4,
    'eigenmap': 'identity(3)',
    'profile': {'family': 'regular_pole', 'C1': 1.0, 'C2': 1.0},
}

EXAMPLES = {
    'verify_inversion': {
        'command': 'verify',
        'map': INVERSION,
        'interval': {'a': 0.5, 'b': 2.0},
        'grid_n': 64,
    },
    'verify_stereographic': {
        'command': 'verify',
        'map': STEREOGRAPHIC,
        'interval': {'a': 0.5, 'b': 2.0},
    },
    'verify_hyperbolic': {
        'command': 'verify',
        'map': HYPERBOLIC,
        'interval': {'a': 0.1, 'b': 0.9},
    },
    'verify_hopf_latitude': {
        'command': 'verify',
        'map': HOPF_LATITUDE,
    },
    'solve_regular_pole': {
        'command': 'solve',
        'map': {'domain': 'flat', 'target': 'flat', 'm': 4, 'eigenmap': 'identity(3)'},
        'bvp': {
            'left': {'mode': 'pole', 'epsilon': 1e-3},
            'right': {'r': 1.0, 'rho': 2.0, 'rho_p': 4.0},
            'samples': [0.5],
        },
    },
    'solve_inversion_fixed': {
        'command': 'solve',
        'map': {'domain': 'flat', 'target': 'flat', 'm': 4, 'eigenmap': 'identity(3)'},
        'bvp': {
            'left': {'mode': 'fixed', 'r': 0.5, 'rho': 2.0, 'rho_p': -4.0},
            'right': {'r': 2.0, 'rho': 0.5, 'rho_p': -0.25},
        },
    },
    'stability_stereographic': {
        'command': 'stability',
        'map': STEREOGRAPHIC,
        'interval': {'a': 0.5, 'b': 2.0},
        'variation': {'shape': [1.0]},
        'index': {'n': 32},
    },
    'stability_hopf_latitude': {
        'command': 'stability',
        'map': HOPF_LATITUDE,
    },
    'families_log_branch': {
        'command': 'families',
        'map': {'m': 2, 'eigenmap': 'identity(1)', 'profile': {'family': 'biharmonic', 'coefficients': [0, 1, 0, 0]}},
        'interval': {'a': 0.5, 'b': 2.0},
    },
    'families_almansi': {
        'command': 'families',
        'map': {'m': 4, 'eigenmap': 'identity(3)', 'profile': {'family': 'biharmonic', 'coefficients': [12, 0, 0, 1]}},
        'interval': {'a': 0.5, 'b': 2.0},
    },
    'classify_stereographic': {
        'command': 'classify',
        'map': STEREOGRAPHIC,
        'interval': {'a': 0.5, 'b': 2.0},
    },
    'sweep_hopf_rho0': {
        'command': 'sweep',
        'map': HOPF_LATITUDE,
        'sweep': {'param': 'rho0', 'from': 0.1, 'to': 1.5, 'steps': 50},
    },
    'sweep_regular_pole_C2': {
        'command': 'sweep',
        'map': REGULAR_POLE,
        'interval': {'a': 1e-3, 'b': 1.0},
        'sweep': {'param': 'C2', 'from': -1.0, 'to': 1.0, 'steps': 21},
    },
}


def create_example_configs(base_path):
    """Write every example config as <name>.json under base_path"""
    os.makedirs(base_path, exist_ok=True)
    written = []
    for name, config in EXAMPLES.items():
        config = dict(config, output={'json': f"{name}.json", 'csv': f"{name}.csv"})
        path = os.path.join(base_path, f"{name}.json")
        with open(path, "w", encoding="utf-8") as f:
            json.dump(config, f, indent=2)
            f.write("\n")
        written.append(path)
    return written


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Create example run configurations for biharmonic-lab")
    parser.add_argument("--path", default="./example_configs", help="Directory where the configs are written")

    args = parser.parse_args()
    paths = create_example_configs(args.path)
    print(f"Wrote {len(paths)} example configs to: {args.path}")
    print("Example: python main.py --config " + os.path.join(args.path, "verify_inversion.json") + " --out-dir out")
