"""Named input fixtures, each a full input document for the command line."""

import copy

from .errors import InputError

_I = [0.0, 1.0]
_ONE = [1.0, 0.0]
_ZERO = [0.0, 0.0]

BUILTINS = {
    "intro-imaginary-unit": {
        "A": {"rows": 1, "cols": 1, "entries": [_I]},
        "f": [_ONE],
    },
    "right-shift": {
        "model": {"kind": "right-shift"},
        "f": {"entries": [[1, 1.0, 0.0], [2, 1.0, 0.0]]},
    },
    "parity-projection": {
        "model": {"kind": "parity-projection"},
        "f": {"entries": [[n, 1.0, 0.0] for n in range(1, 5)]},
    },
    "jordan-zero-index2": {
        "A": {"rows": 2, "cols": 2, "entries": [_ZERO, _ONE, _ZERO, _ZERO]},
        "f": [_ZERO, _ONE],
    },
    "diag-mixed-spectrum": {
        "model": {"kind": "diagonal", "atoms": [[1, 0.0, 0.0], [2, 0.0, 1.0], [3, -1.0, 0.0]], "default": _ZERO},
        "f": {"entries": [[n, 1.0, 0.0] for n in range(1, 4)]},
    },
    "selfadjoint-nonpositive": {
        "model": {
            "kind": "diagonal",
            "atoms": [[1, 0.0, 0.0], [2, -0.5, 0.0], [3, -1.0, 0.0], [4, -2.0, 0.0], [5, 0.0, 0.0]],
            "default": [-1.0, 0.0],
        },
        "f": {"entries": [[1, 1.0, 0.0], [2, -1.0, 0.0], [3, 0.5, 0.0], [4, 2.0, 0.0], [5, 0.25, 0.0]]},
    },
}


def builtin_names():
    return sorted(BUILTINS)


def builtin_models():
    """``(name, input document)`` pairs for every fixture."""
    return [(name, load_builtin(name)) for name in builtin_names()]


def load_builtin(name):
    if name not in BUILTINS:
        raise InputError(f"unknown builtin {name!r}; available: {', '.join(builtin_names())}")
    return copy.deepcopy(BUILTINS[name])
