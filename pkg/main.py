#!/usr/bin/env python3
"""
biharmonic-lab - biharmonic equivariant maps between model spaces

Evaluates, solves, verifies and stability-tests equivariant maps described
by a single JSON run configuration, writing JSON reports and CSV data.
"""
import argparse
import contextlib
import sys

from src.config import load_config
from src.errors import BiharmonicError
from src.runner import EXIT_OK, Runner, exit_code_for
from src.ui import ConsoleReporter


def main(argv=None):
    parser = argparse.ArgumentParser(description="biharmonic-lab - biharmonic equivariant maps between model spaces")
    parser.add_argument("--config", required=True, help="Path to the JSON run configuration")
    parser.add_argument("--out-dir", default=".", help="Directory for the JSON report and CSV data")
    parser.add_argument("--quiet", action="store_true", help="Print nothing on success")
    parser.add_argument("--verbose", action="store_true", help="Enable detailed output")

    args = parser.parse_args(argv)
    ui = ConsoleReporter(quiet=args.quiet)

    try:
        config = load_config(args.config)
        runner = Runner(config, out_dir=args.out_dir, verbose=args.verbose and not args.quiet)
        busy = contextlib.nullcontext() if runner.verbose else ui.spinner(f"Running {config.command}")
        with busy:
            payload = runner.run()
        ui.display_payload(payload, runner.written)
    except (BiharmonicError, ValueError, ArithmeticError, OSError) as e:
        code = exit_code_for(e)
        ui.display_error(e, code)
        return code

    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
