"""JSON encodings for matrices, vectors and sequence-space models.

Complex scalars are ``[re, im]``. A matrix is
``{"rows": n, "cols": n, "entries": [[re, im], ...]}`` in row-major order; a
dense vector is a list of complex scalars. A finite-support sequence is
``{"entries": [[index, re, im], ...]}`` and a diagonal operator is
``{"atoms": [[index, re, im], ...], "default": [re, im]}``.
"""

import hashlib
import json
import math

import numpy as np

from .errors import InputError
from .operator_models import Diagonal, FiniteSupportVector, ParityProjection, RightShift


def _real(x, where):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise InputError(f"{where}: expected a number, got {x!r}")
    x = float(x)
    if not math.isfinite(x):
        raise InputError(f"{where}: non-finite value")
    return x


def decode_complex(value, where="scalar"):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(_real(value, where))
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(_real(value[0], where), _real(value[1], where))
    raise InputError(f"{where}: complex scalars are [re, im], got {value!r}")


def encode_complex(z):
    z = complex(z)
    return [z.real, z.imag]


def decode_matrix(obj):
    if not isinstance(obj, dict) or not {"rows", "cols", "entries"} <= set(obj):
        raise InputError('matrix must be an object with "rows", "cols" and "entries"')
    rows, cols = obj["rows"], obj["cols"]
    if not all(isinstance(v, int) and not isinstance(v, bool) and v > 0 for v in (rows, cols)):
        raise InputError("matrix rows and cols must be positive integers")
    if rows != cols:
        raise InputError(f"matrix must be square, got {rows}x{cols}")
    entries = obj["entries"]
    if not isinstance(entries, list) or len(entries) != rows * cols:
        raise InputError(f"matrix needs {rows * cols} entries")
    values = [decode_complex(e, f"A entry {i}") for i, e in enumerate(entries)]
    return np.array(values, dtype=complex).reshape(rows, cols)


def encode_matrix(M):
    M = np.asarray(M, dtype=complex)
    return {
        "rows": int(M.shape[0]),
        "cols": int(M.shape[1]),
        "entries": [encode_complex(z) for z in M.ravel()],
    }


def decode_vector(obj):
    if not isinstance(obj, list) or not obj:
        raise InputError("vector must be a nonempty list of [re, im] scalars")
    return np.array([decode_complex(e, f"f entry {i}") for i, e in enumerate(obj)], dtype=complex)


def encode_vector(v):
    return [encode_complex(z) for z in np.asarray(v, dtype=complex)]


def _index(value, where):
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise InputError(f"{where}: indices are integers >= 1, got {value!r}")
    return value


def decode_sequence(obj):
    if not isinstance(obj, dict) or not isinstance(obj.get("entries"), list):
        raise InputError('sequence must be {"entries": [[index, re, im], ...]}')
    out = {}
    for e in obj["entries"]:
        if not isinstance(e, list) or len(e) != 3:
            raise InputError(f"sequence entry must be [index, re, im], got {e!r}")
        n = _index(e[0], "sequence entry")
        if n in out:
            raise InputError(f"duplicate sequence index {n}")
        out[n] = complex(_real(e[1], "sequence entry"), _real(e[2], "sequence entry"))
    return FiniteSupportVector(out)


def encode_sequence(v):
    return {"entries": [[n, z.real, z.imag] for n, z in v]}


def decode_diagonal(obj):
    if not isinstance(obj, dict) or not isinstance(obj.get("atoms"), list):
        raise InputError('diagonal operator must be {"atoms": [[index, re, im], ...], "default": [re, im]}')
    atoms = {}
    for e in obj["atoms"]:
        if not isinstance(e, list) or len(e) != 3:
            raise InputError(f"atom must be [index, re, im], got {e!r}")
        n = _index(e[0], "atom")
        if n in atoms:
            raise InputError(f"duplicate atom index {n}")
        atoms[n] = complex(_real(e[1], "atom"), _real(e[2], "atom"))
    default = decode_complex(obj.get("default", [0.0, 0.0]), "default")
    return Diagonal(atoms, default)


def encode_diagonal(op):
    return {
        "atoms": [[n, z.real, z.imag] for n, z in op.atoms.items()],
        "default": encode_complex(op.default),
    }


def decode_model(obj):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InputError('model must be an object with a "kind"')
    kind = obj["kind"]
    if kind == "right-shift":
        return RightShift()
    if kind == "parity-projection":
        return ParityProjection()
    if kind == "diagonal":
        return decode_diagonal(obj)
    raise InputError(f"unknown model kind {kind!r} (right-shift, parity-projection, diagonal)")


def encode_model(op):
    out = {"kind": op.kind}
    if isinstance(op, Diagonal):
        out.update(encode_diagonal(op))
    return out


def to_jsonable(x):
    """Recursively convert numpy/complex values; non-finite floats become strings."""
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return to_jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [to_jsonable(float(x.real)), to_jsonable(float(x.imag))]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


def canonical_json(obj, indent=None):
    """Deterministic JSON: sorted keys, shortest round-trip floats."""
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=indent, allow_nan=False)


def digest(obj):
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()
