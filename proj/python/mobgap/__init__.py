"""Local distance, real-space Chern numbers and localization diagnostics for lattice Hamiltonians."""

from ._mobgap import *  # noqa: F401,F403
from ._mobgap import __doc__  # noqa: F401


def run(*args):
    """Runs the command-line tool in-process with string arguments; returns (code, stdout, stderr)."""
    return run_cli([str(a) for a in args])  # noqa: F405
