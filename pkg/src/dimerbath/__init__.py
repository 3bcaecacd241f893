"""Exact dimer exciton-transfer dynamics with shared, independent, and
correlated phonon baths.

Submodules are imported lazily so that the command-line entry point can
configure BLAS thread counts via environment variables before numpy is
first loaded.
"""

import importlib

__version__ = "0.1.0"

_SUBMODULES = ("spaces", "models", "thermal", "dynamics", "equivalence", "cli")

__all__ = list(_SUBMODULES) + ["__version__"]


def __getattr__(name):
    if name in _SUBMODULES:
        return importlib.import_module(f".{name}", __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return sorted(__all__)
