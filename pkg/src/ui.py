"""
Terminal output for biharmonic-lab.
Prints coloured run summaries and error diagnostics, and provides the
spinner shown while a command runs.
"""
import itertools
import json
import sys
import threading
import time

from colorama import Fore, Style, init
from tabulate import tabulate

from src.tension import HARMONIC, NEITHER, PROPER_BIHARMONIC

# Initialize colorama for cross-platform colored terminal output
init()

VERDICT_COLOURS = {
    HARMONIC: Fore.CYAN,
    PROPER_BIHARMONIC: Fore.GREEN,
    NEITHER: Fore.RED,
}


def _number(value):
    if isinstance(value, float):
        return f"{value:.6g}"
    return value


class ConsoleReporter:
    """
    Shows run results on the terminal. Nothing is printed when quiet,
    except error diagnostics, which always go to standard error.
    """
    def __init__(self, quiet=False, stream=None):
        self.quiet = quiet
        self.stream = stream or sys.stdout

    def _print(self, text=""):
        if not self.quiet:
            print(text, file=self.stream)

    def verdict(self, verdict):
        colour = VERDICT_COLOURS.get(verdict, Fore.YELLOW)
        return f"{colour}{verdict}{Style.RESET_ALL}"

    def display_payload(self, payload, written=()):
        """Summarise a command payload as a table of its scalar entries"""
        command = payload.get('command', '')
        self._print(f"\n{Fore.CYAN}===== biharmonic-lab: {command} ====={Style.RESET_ALL}\n")

        description = payload.get('map') or payload.get('models')
        if description:
            self._print(tabulate([[k, _number(v)] for k, v in description.items()], tablefmt="plain"))
            self._print()

        rows = self._flatten(payload)
        if rows:
            self._print(tabulate(rows, headers=["Quantity", "Value"], tablefmt="pipe"))

        for path in written:
            self._print(f"{Fore.YELLOW}Wrote:{Style.RESET_ALL} {path}")

    def _flatten(self, payload, prefix=''):
        rows = []
        for key, value in payload.items():
            if key in ('command', 'map', 'models'):
                continue
            name = f"{prefix}{key}"
            if isinstance(value, dict):
                rows += self._flatten(value, prefix=f"{name}.")
            elif isinstance(value, list):
                rows.append([name, f"[{len(value)} values]"])
            elif key == 'verdict':
                rows.append([name, self.verdict(value)])
            else:
                rows.append([name, _number(value)])
        return rows

    def display_error(self, exc, exit_code):
        """Machine-readable diagnostic on stderr, plus a coloured line unless quiet"""
        diagnostic = {
            'error': type(exc).__name__,
            'message': str(exc),
            'exit_code': exit_code,
        }
        for name in ('diagnostics', 'suggestions', 'mismatch', 'abscissa'):
            value = getattr(exc, name, None)
            if value:
                diagnostic[name] = value
        last_state = getattr(exc, 'last_state', None)
        if last_state is not None:
            diagnostic['last_state'] = last_state.to_row()
        print(json.dumps(diagnostic, default=str), file=sys.stderr)
        self._print(f"{Fore.RED}Error:{Style.RESET_ALL} {exc}")

    def spinner(self, message="Processing"):
        """
        Return a context manager for displaying a spinner during long operations.

        Usage:
            with ui.spinner("Assembling"):
                # Long operation here
        """
        quiet = self.quiet
        stream = self.stream

        class Spinner:
            def __init__(self, message):
                self.message = message
                self.running = False
                self.spinner_thread = None

            def spin(self):
                frames = itertools.cycle(['|', '/', '-', '\\'])
                while self.running:
                    stream.write(f"\r{self.message} {next(frames)} ")
                    stream.flush()
                    time.sleep(0.1)
                stream.write(f"\r{self.message} Done!{' ' * 10}\n")

            def __enter__(self):
                if quiet:
                    return self
                self.running = True
                self.spinner_thread = threading.Thread(target=self.spin, daemon=True)
                self.spinner_thread.start()
                return self

            def __exit__(self, exc_type, exc_val, exc_tb):
                self.running = False
                if self.spinner_thread:
                    self.spinner_thread.join()

        return Spinner(message)
